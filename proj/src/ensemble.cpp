#include "aot/ensemble.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aot/couplings.h"
#include "aot/errors.h"
#include "aot/linalg.h"
#include "aot/rng.h"

namespace aot {

namespace {

const char* kCsvHeader =
    "N,path,cost_sync,cost_indep,cost_aw,cost_ab,bw2,aw2,frobL2,frobM2,nuc_diag,cross_frob2";

void validate_config(const EnsembleConfig& config) {
    if (config.d < 1) throw InputError("block size must be at least 1");
    if (config.N_values.empty()) throw InputError("at least one horizon is required");
    for (Eigen::Index N : config.N_values)
        if (N < 1) throw InputError("horizons must be at least 1");
    if (config.paths < 1) throw InputError("path count must be at least 1");
    for (const std::string& name : config.couplings)
        if (name != "sync" && name != "indep" && name != "aw" && name != "ab" && name != "bw")
            throw InputError("unknown coupling family: " + name);
}

double cost_column(const EnsembleRecord& r, const std::string& name) {
    if (name == "sync") return r.cost_sync;
    if (name == "indep") return r.cost_indep;
    if (name == "aw") return r.cost_aw;
    if (name == "ab") return r.cost_ab;
    if (name == "bw") return r.bw2;
    throw InputError("unknown coupling family: " + name);
}

std::vector<EnsembleRecord> run_jobs(const EnsembleConfig& config, bool parallel) {
    validate_config(config);
    const std::int64_t per = config.paths;
    const std::int64_t total = std::int64_t(config.N_values.size()) * per;
    std::vector<EnsembleRecord> records(static_cast<std::size_t>(total));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#else
    (void)parallel;
#endif
    for (std::int64_t j = 0; j < total; ++j) {
        Eigen::Index N = config.N_values[std::size_t(j / per)];
        Eigen::Index p = Eigen::Index(j % per);
        auto seeds = ensemble_pair_seeds(config.base_seed, N, p);
        BlockLowerCholesky L = sample_ensemble_factor(N, config.d, seeds.first);
        BlockLowerCholesky M = sample_ensemble_factor(N, config.d, seeds.second);
        records[std::size_t(j)] = make_ensemble_record(N, p, L, M);
    }
    return records;
}

void append_number(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

Eigen::Index parse_index_field(const std::string& field, const std::string& line) {
    long long value = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw InputError("malformed csv line: " + line);
    return Eigen::Index(value);
}

double parse_double_field(const std::string& field, const std::string& line) {
    double value = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw InputError("malformed csv line: " + line);
    return value;
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> ensemble_pair_seeds(std::uint64_t base_seed,
                                                            Eigen::Index N,
                                                            Eigen::Index path_index) {
    std::uint64_t n = std::uint64_t(N);
    std::uint64_t p = std::uint64_t(path_index);
    return {mix_seed(base_seed, n, 2 * p), mix_seed(base_seed, n, 2 * p + 1)};
}

BlockLowerCholesky sample_ensemble_factor(Eigen::Index N, Eigen::Index d, std::uint64_t seed) {
    if (N < 1 || d < 1) throw InputError("factor dimensions must be at least 1");
    BlockLowerCholesky F(N, d);
    std::mt19937_64 gen(seed);
    for (Eigen::Index s = 0; s < N; ++s)
        fill_standard_normal(F.A.block(s * d, 0, d, (s + 1) * d), gen);
    return F;
}

EnsembleRecord make_ensemble_record(Eigen::Index N, Eigen::Index path_index,
                                    const BlockLowerCholesky& L, const BlockLowerCholesky& M) {
    require_same_shape(L, M);
    EnsembleRecord r;
    r.N = N;
    r.path_index = path_index;
    r.frobL2 = L.frob_squared();
    r.frobM2 = M.frob_squared();
    r.cost_sync = (L.A - M.A).squaredNorm();
    r.cost_indep = r.frobL2 + r.frobM2;

    BlockCorrelation P = optimal_aw_correlation(L, M);
    double cross_aw = 0.0;
    for (Eigen::Index t = 0; t < L.N; ++t) {
        Eigen::MatrixXd C = BlockLowerCholesky::cross_diag_block(L, M, t);
        r.nuc_diag += nuclear_norm(C);
        cross_aw += (C * P.blocks[std::size_t(t)]).trace();
    }
    r.aw2 = std::max(r.cost_indep - 2.0 * r.nuc_diag, 0.0);
    r.cost_aw = r.cost_indep - 2.0 * cross_aw;
    r.cost_ab = adapted_brenier_divergence(L, M);

    Eigen::MatrixXd B = L.A.transpose() * M.A;
    r.cross_frob2 = B.squaredNorm();
    r.bw2 = std::max(r.cost_indep - 2.0 * nuclear_norm(B), 0.0);
    return r;
}

std::vector<EnsembleRecord> run_ensemble(const EnsembleConfig& config) {
    return run_jobs(config, true);
}

std::vector<EnsembleRecord> run_ensemble_serial(const EnsembleConfig& config) {
    return run_jobs(config, false);
}

std::vector<SummaryRow> summarize(const std::vector<EnsembleRecord>& records,
                                  const EnsembleConfig& config) {
    validate_config(config);
    std::vector<SummaryRow> rows;
    for (Eigen::Index N : config.N_values) {
        for (const std::string& name : config.couplings) {
            std::vector<double> ratios;
            for (const EnsembleRecord& r : records) {
                if (r.N != N) continue;
                ratios.push_back(cost_column(r, name) / r.aw2);
            }
            if (ratios.empty())
                throw InputError("no records for horizon " + std::to_string(N));
            SummaryRow row;
            row.N = N;
            row.ratio = name + "/aw";
            row.q1 = quantile(ratios, 0.25);
            row.median = quantile(ratios, 0.5);
            row.q3 = quantile(ratios, 0.75);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<AsymptoticsRow> verify_asymptotics(const EnsembleConfig& config) {
    std::vector<EnsembleRecord> records = run_ensemble(config);
    std::vector<AsymptoticsRow> rows;
    for (Eigen::Index N : config.N_values) {
        const double N2 = double(N) * double(N);
        std::vector<double> frob, nuc, cross;
        for (const EnsembleRecord& r : records) {
            if (r.N != N) continue;
            frob.push_back(r.frobL2 / N2);
            nuc.push_back(r.nuc_diag / N2);
            cross.push_back(r.cross_frob2 / (N2 * double(N)));
        }
        if (frob.empty()) throw InputError("no records for horizon " + std::to_string(N));
        AsymptoticsRow row;
        row.N = N;
        row.frob_scaled_median = quantile(frob, 0.5);
        row.frob_scaled_iqr = quantile(frob, 0.75) - quantile(frob, 0.25);
        row.nuc_diag_scaled_median = quantile(nuc, 0.5);
        row.nuc_diag_scaled_iqr = quantile(nuc, 0.75) - quantile(nuc, 0.25);
        row.cross_scaled_median = quantile(cross, 0.5);
        row.cross_scaled_iqr = quantile(cross, 0.75) - quantile(cross, 0.25);
        rows.push_back(std::move(row));
    }
    return rows;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InputError("quantile of an empty sample");
    if (q < 0.0 || q > 1.0) throw InputError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = double(values.size() - 1) * q;
    const std::size_t lo = std::size_t(h);
    const double frac = h - double(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

void emit_csv(const std::vector<EnsembleRecord>& records, const std::string& path) {
    std::vector<EnsembleRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const EnsembleRecord& a, const EnsembleRecord& b) {
                         return a.N != b.N ? a.N < b.N : a.path_index < b.path_index;
                     });
    std::string out = kCsvHeader;
    out += '\n';
    for (const EnsembleRecord& r : sorted) {
        out += std::to_string(r.N);
        out += ',';
        out += std::to_string(r.path_index);
        const double columns[] = {r.cost_sync, r.cost_indep, r.cost_aw, r.cost_ab, r.bw2,
                                  r.aw2,       r.frobL2,     r.frobM2,  r.nuc_diag, r.cross_frob2};
        for (double v : columns) {
            out += ',';
            append_number(out, v);
        }
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot open file for writing: " + path);
    file << out;
    if (!file) throw InputError("write failed: " + path);
}

std::vector<EnsembleRecord> parse_csv(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot open file for reading: " + path);
    std::string line;
    if (!std::getline(file, line) || line != kCsvHeader)
        throw InputError("unexpected csv header in " + path);
    std::vector<EnsembleRecord> records;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 12) throw InputError("malformed csv line: " + line);
        EnsembleRecord r;
        r.N = parse_index_field(fields[0], line);
        r.path_index = parse_index_field(fields[1], line);
        double* slots[] = {&r.cost_sync, &r.cost_indep, &r.cost_aw, &r.cost_ab, &r.bw2,
                           &r.aw2,       &r.frobL2,     &r.frobM2,  &r.nuc_diag, &r.cross_frob2};
        for (std::size_t i = 0; i < 10; ++i) *slots[i] = parse_double_field(fields[i + 2], line);
        records.push_back(r);
    }
    return records;
}

void emit_plot_data(const std::vector<SummaryRow>& summary, const std::string& path) {
    std::string out = "N,ratio,q1,median,q3";
    out += '\n';
    for (const SummaryRow& row : summary) {
        out += std::to_string(row.N);
        out += ',';
        out += row.ratio;
        for (double v : {row.q1, row.median, row.q3}) {
            out += ',';
            append_number(out, v);
        }
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot open file for writing: " + path);
    file << out;
    if (!file) throw InputError("write failed: " + path);
}

}  // namespace aot
