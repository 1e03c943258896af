#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aot/ensemble.h"
#include "aot/errors.h"

using namespace aot;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const char* kHeader = "N,path,cost_sync,cost_indep,cost_aw,cost_ab,bw2,aw2,frobL2,frobM2,nuc_diag,cross_frob2";

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("factor sampling structure and determinism") {
    BlockLowerCholesky L1 = sample_ensemble_factor(4, 3, 5);
    BlockLowerCholesky L2 = sample_ensemble_factor(4, 3, 5);
    CHECK((L1.A - L2.A).norm() == 0.0);
    BlockLowerCholesky L3 = sample_ensemble_factor(4, 3, 6);
    CHECK((L1.A - L3.A).norm() != 0.0);

    for (int s = 0; s < 4; ++s)
        for (int t = s + 1; t < 4; ++t) CHECK(L1.block(s, t).isZero(0.0));
    // blocks on and below the diagonal are dense draws
    for (int s = 0; s < 4; ++s)
        for (int t = 0; t <= s; ++t) CHECK(L1.block(s, t).cwiseAbs().minCoeff() > 0.0);

    CHECK_THROWS_AS(sample_ensemble_factor(0, 1, 1), InputError);
}

TEST_CASE("factor norm concentration") {
    const int N = 100, paths = 200;
    double acc = 0.0;
    for (int p = 0; p < paths; ++p) {
        auto seeds = ensemble_pair_seeds(9, N, p);
        acc += sample_ensemble_factor(N, 2, seeds.first).frob_squared() / double(N) / double(N);
    }
    double mean = acc / paths;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("single-step scalar records in closed form") {
    EnsembleConfig config;
    config.d = 1;
    config.N_values = {1};
    config.paths = 5;
    config.base_seed = 77;
    std::vector<EnsembleRecord> records = run_ensemble(config);
    REQUIRE(records.size() == 5);
    for (const EnsembleRecord& r : records) {
        auto seeds = ensemble_pair_seeds(77, 1, r.path_index);
        double l = sample_ensemble_factor(1, 1, seeds.first).A(0, 0);
        double m = sample_ensemble_factor(1, 1, seeds.second).A(0, 0);
        CHECK(r.cost_sync == doctest::Approx((l - m) * (l - m)).epsilon(1e-12));
        CHECK(r.cost_indep == doctest::Approx(l * l + m * m).epsilon(1e-12));
        CHECK(r.aw2 == doctest::Approx(l * l + m * m - 2 * std::abs(l * m)).epsilon(1e-12));
        CHECK(r.bw2 == doctest::Approx(r.aw2).epsilon(1e-12));
        CHECK(r.cost_ab == doctest::Approx(r.aw2).epsilon(1e-12));
        CHECK(r.frobL2 == doctest::Approx(l * l).epsilon(1e-12));
        CHECK(r.cross_frob2 == doctest::Approx(l * l * m * m).epsilon(1e-12));
    }
}

TEST_CASE("per-record cost ordering") {
    EnsembleConfig config;
    config.d = 2;
    config.N_values = {5, 10};
    config.paths = 50;
    config.base_seed = 3;
    std::vector<EnsembleRecord> records = run_ensemble(config);
    REQUIRE(records.size() == 100);
    Eigen::Index at = 0;
    for (Eigen::Index N : {5, 10})
        for (Eigen::Index p = 0; p < 50; ++p, ++at) {
            const EnsembleRecord& r = records[std::size_t(at)];
            CHECK(r.N == N);
            CHECK(r.path_index == p);
            CHECK(std::isfinite(r.cost_ab));
            CHECK(r.bw2 <= r.aw2 + 1e-9);
            CHECK(r.aw2 <= r.cost_sync + 1e-9);
            CHECK(r.aw2 <= r.cost_indep + 1e-9);
            CHECK(r.aw2 <= r.cost_ab + 1e-9);
            CHECK(r.cost_aw == doctest::Approx(r.aw2).epsilon(1e-9));
            CHECK(r.nuc_diag >= 0.0);
            CHECK(r.cross_frob2 >= 0.0);
        }
}

TEST_CASE("parallel run matches the serial reference") {
#ifdef _OPENMP
    omp_set_num_threads(2);
#endif
    EnsembleConfig config;
    config.d = 2;
    config.N_values = {3, 7};
    config.paths = 20;
    config.base_seed = 41;
    std::vector<EnsembleRecord> serial = run_ensemble_serial(config);
    std::vector<EnsembleRecord> parallel = run_ensemble(config);
    CHECK(serial == parallel);

    emit_csv(serial, "ensemble_serial_tmp.csv");
    emit_csv(parallel, "ensemble_parallel_tmp.csv");
    CHECK(slurp("ensemble_serial_tmp.csv") == slurp("ensemble_parallel_tmp.csv"));
    std::remove("ensemble_serial_tmp.csv");
    std::remove("ensemble_parallel_tmp.csv");
}

TEST_CASE("config validation") {
    EnsembleConfig config;
    config.N_values = {2};
    config.d = 0;
    CHECK_THROWS_AS(run_ensemble(config), InputError);
    config.d = 1;
    config.N_values = {};
    CHECK_THROWS_AS(run_ensemble(config), InputError);
    config.N_values = {2};
    config.paths = 0;
    CHECK_THROWS_AS(run_ensemble(config), InputError);
    config.paths = 1;
    config.couplings = {"sync", "nope"};
    CHECK_THROWS_AS(run_ensemble(config), InputError);
}

TEST_CASE("quantiles interpolate between order statistics") {
    std::vector<double> v = {3, 1, 4, 2};
    CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 0.75) == doctest::Approx(3.25));
    CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(quantile(v, 1.0) == doctest::Approx(4.0));
    CHECK(quantile({7.0}, 0.5) == doctest::Approx(7.0));
    CHECK_THROWS_AS(quantile({}, 0.5), InputError);
}

TEST_CASE("summary quartiles from hand-built records") {
    std::vector<EnsembleRecord> records;
    for (int p = 0; p < 4; ++p) {
        EnsembleRecord r;
        r.N = 2;
        r.path_index = p;
        r.aw2 = 2.0;
        r.cost_sync = 2.0 * (p + 1);
        records.push_back(r);
    }
    EnsembleConfig config;
    config.d = 1;
    config.N_values = {2};
    config.paths = 4;
    config.couplings = {"sync"};
    std::vector<SummaryRow> rows = summarize(records, config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].N == 2);
    CHECK(rows[0].ratio == "sync/aw");
    CHECK(rows[0].q1 == doctest::Approx(1.75));
    CHECK(rows[0].median == doctest::Approx(2.5));
    CHECK(rows[0].q3 == doctest::Approx(3.25));

    emit_plot_data(rows, "plot_tmp.csv");
    std::string text = slurp("plot_tmp.csv");
    CHECK(text == "N,ratio,q1,median,q3\n2,sync/aw,1.75,2.5,3.25\n");
    std::remove("plot_tmp.csv");
}

TEST_CASE("synchronous-to-optimal ratio declines with the horizon") {
    EnsembleConfig config;
    config.d = 1;
    config.N_values = {10, 50, 100, 200};
    config.paths = 100;
    config.base_seed = 2024;
    config.couplings = {"sync"};
    std::vector<SummaryRow> rows = summarize(run_ensemble(config), config);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].median >= 1.0 - 1e-12);
        if (i > 0) CHECK(rows[i].median <= rows[i - 1].median + 1e-3);
    }
}

TEST_CASE("scaled statistics settle near their limits") {
    EnsembleConfig config;
    config.d = 2;
    config.N_values = {200};
    config.paths = 200;
    config.base_seed = 6;
    std::vector<AsymptoticsRow> rows = verify_asymptotics(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].frob_scaled_median == doctest::Approx(2.0).epsilon(0.10));
    CHECK(rows[0].cross_scaled_median == doctest::Approx(8.0 / 3.0).epsilon(0.10));
    CHECK(rows[0].nuc_diag_scaled_median <= 0.5);
    CHECK(rows[0].frob_scaled_iqr > 0.0);

    EnsembleConfig tail;
    tail.d = 1;
    tail.N_values = {400};
    tail.paths = 100;
    tail.base_seed = 8;
    std::vector<AsymptoticsRow> tail_rows = verify_asymptotics(tail);
    CHECK(tail_rows[0].nuc_diag_scaled_median <= 0.1);
}

TEST_CASE("classical-to-adapted gap at moderate size") {
    EnsembleConfig config;
    config.d = 2;
    config.N_values = {100};
    config.paths = 50;
    config.base_seed = 13;
    config.couplings = {"bw"};
    std::vector<SummaryRow> rows = summarize(run_ensemble(config), config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].median < 0.9);
    CHECK(rows[0].median > 0.0);
}

TEST_CASE("csv round-trip and stable schema") {
    emit_csv({}, "empty_tmp.csv");
    CHECK(slurp("empty_tmp.csv") == std::string(kHeader) + "\n");
    std::remove("empty_tmp.csv");

    EnsembleConfig config;
    config.d = 2;
    config.N_values = {3};
    config.paths = 7;
    config.base_seed = 99;
    std::vector<EnsembleRecord> records = run_ensemble(config);
    emit_csv(records, "roundtrip_tmp.csv");
    std::string text = slurp("roundtrip_tmp.csv");
    CHECK(text.substr(0, text.find('\n')) == kHeader);
    std::vector<EnsembleRecord> back = parse_csv("roundtrip_tmp.csv");
    CHECK(back == records);
    std::remove("roundtrip_tmp.csv");

    CHECK_THROWS_AS(parse_csv("no_such_file_tmp.csv"), InputError);
}

}  // TEST_SUITE
