#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aot/cholesky.h"
#include "aot/couplings.h"
#include "aot/ensemble.h"
#include "aot/errors.h"
#include "aot/gelbrich.h"
#include "aot/linalg.h"
#include "aot/matrix_io.h"
#include "aot/metrics.h"
#include "aot/process.h"

namespace {

using namespace aot;
using nlohmann::ordered_json;

double rank_tol_from_env() {
    const char* text = std::getenv("AOT_RANK_TOL");
    if (!text) return kAutoRankTol;
    char* end = nullptr;
    const double value = std::strtod(text, &end);
    if (end == text || *end != '\0' || !(value >= 0.0))
        throw InputError("AOT_RANK_TOL must be a non-negative number");
    return value;
}

void print_scalar(double value) { std::printf("%.17g\n", value); }

ordered_json matrix_json(const Eigen::MatrixXd& M) {
    ordered_json j;
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    std::vector<double> data;
    data.reserve(std::size_t(M.size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
    j["data"] = data;
    return j;
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw InputError("write failed: " + path);
}

struct DistanceOpts {
    std::string kind, first, second, report;
    bool cov = false;
};

void run_distance(const DistanceOpts& o) {
    const double rank_tol = rank_tol_from_env();
    double value = 0.0;
    if (o.kind == "bw" || o.kind == "w2" || o.kind == "aw-laws") {
        if (!o.report.empty()) throw InputError("--report applies to the aw and ab kinds");
        MatrixFile fa = load_matrix_file(o.first);
        MatrixFile fb = load_matrix_file(o.second);
        Eigen::VectorXd a = fa.mean ? *fa.mean : Eigen::VectorXd::Zero(fa.matrix.rows());
        Eigen::VectorXd b = fb.mean ? *fb.mean : Eigen::VectorXd::Zero(fb.matrix.rows());
        if (o.kind == "bw")
            value = bures_wasserstein(fa.matrix, fb.matrix);
        else if (o.kind == "w2")
            value = w2_gaussian(a, fa.matrix, b, fb.matrix);
        else
            value = aw2_gaussian_laws(a, fa.matrix, b, fb.matrix);
    } else {
        if (o.cov) throw InputError("--cov applies to covariance inputs only");
        FilteredGaussianProcess X = as_process(load_matrix_file(o.first));
        FilteredGaussianProcess Y = as_process(load_matrix_file(o.second));
        if (o.kind == "aw")
            value = aw2_filtered(X, Y);
        else
            value = coupling_cost(X, Y, adapted_brenier_correlation(X.factor, Y.factor, rank_tol));
        if (!o.report.empty()) {
            ordered_json j;
            j["kind"] = o.kind;
            j["value"] = value;
            std::vector<double> nucs;
            for (Eigen::Index t = 0; t < X.factor.N; ++t)
                nucs.push_back(
                    nuclear_norm(BlockLowerCholesky::cross_diag_block(X.factor, Y.factor, t)));
            j["block_nuclear_norms"] = nucs;
            Eigen::MatrixXd Q =
                o.kind == "aw"
                    ? procrustes_optimizer(X.factor, Y.factor, rank_tol).Q
                    : adapted_brenier_correlation(X.factor, Y.factor, rank_tol).dense();
            j["optimizer_Q"] = matrix_json(Q);
            write_text(j.dump(2) + "\n", o.report);
        }
    }
    print_scalar(value);
}

struct ProjectOpts {
    std::string kind, input, output, phi;
};

void run_project(const ProjectOpts& o) {
    MatrixFile f = load_matrix_file(o.input);
    BlockLowerCholesky L = as_block_factor(f);
    BlockLowerCholesky out;
    if (o.kind == "martingale") {
        if (!o.phi.empty()) throw InputError("--phi applies to common-dynamics");
        out = martingale_projection(L);
    } else {
        if (o.phi.empty()) throw InputError("common-dynamics needs --phi");
        MatrixFile pf = load_matrix_file(o.phi);
        if (pf.matrix.cols() != L.d || pf.matrix.rows() != (L.N - 1) * L.d)
            throw InputError("phi file must stack N-1 blocks of size d x d");
        std::vector<Eigen::MatrixXd> phi;
        for (Eigen::Index s = 0; s + 1 < L.N; ++s)
            phi.push_back(pf.matrix.block(s * L.d, 0, L.d, L.d));
        out = common_dynamics_projection(L, phi);
    }
    MatrixFile of = to_matrix_file(out);
    of.mean = f.mean;
    save_matrix_file(of, o.output);
}

struct GeodesicOpts {
    std::string first, second, output;
    double u = 0.0;
};

void run_geodesic(const GeodesicOpts& o) {
    FilteredGaussianProcess X0 = as_process(load_matrix_file(o.first));
    FilteredGaussianProcess X1 = as_process(load_matrix_file(o.second));
    save_matrix_file(to_matrix_file(geodesic_point(X0, X1, o.u)), o.output);
}

struct CouplingBuildOpts {
    std::string kind, first, second, output;
};

void run_coupling_build(const CouplingBuildOpts& o) {
    const double rank_tol = rank_tol_from_env();
    BlockLowerCholesky L = as_block_factor(load_matrix_file(o.first));
    BlockLowerCholesky M = as_block_factor(load_matrix_file(o.second));
    require_same_shape(L, M);
    if (o.kind == "bw") {
        save_matrix_file(to_matrix_file(classical_brenier_correlation(L, M, rank_tol)), o.output);
        return;
    }
    BlockCorrelation P;
    if (o.kind == "sync")
        P = BlockCorrelation::identity(L.N, L.d);
    else if (o.kind == "indep")
        P = BlockCorrelation::zero(L.N, L.d);
    else if (o.kind == "aw")
        P = optimal_aw_correlation(L, M, rank_tol);
    else
        P = adapted_brenier_correlation(L, M, rank_tol);
    save_matrix_file(to_matrix_file(P), o.output);
}

struct CouplingEvalOpts {
    std::string first, second, correlation;
};

void run_coupling_evaluate(const CouplingEvalOpts& o) {
    FilteredGaussianProcess X = as_process(load_matrix_file(o.first));
    FilteredGaussianProcess Y = as_process(load_matrix_file(o.second));
    MatrixFile pf = load_matrix_file(o.correlation);
    double value = pf.block_N ? coupling_cost(X, Y, as_block_correlation(pf))
                              : coupling_cost(X, Y, FullCorrelation(pf.matrix));
    print_scalar(value);
}

struct CouplingSampleOpts {
    std::string first, second, correlation, out_x, out_y;
    long long n = 0;
    std::uint64_t seed = 0;
};

void run_coupling_sample(const CouplingSampleOpts& o) {
    FilteredGaussianProcess X = as_process(load_matrix_file(o.first));
    FilteredGaussianProcess Y = as_process(load_matrix_file(o.second));
    MatrixFile pf = load_matrix_file(o.correlation);
    if (!pf.block_N) throw InputError("sampling needs a block-diagonal correlation");
    CoupledPaths paths = sample_coupled_paths(X, Y, as_block_correlation(pf), o.n, o.seed);
    save_matrix_file(to_matrix_file(Eigen::MatrixXd(paths.x)), o.out_x);
    save_matrix_file(to_matrix_file(Eigen::MatrixXd(paths.y)), o.out_y);
}

struct EnsembleOpts {
    long long d = 1, paths = 100;
    std::vector<long long> N_list;
    std::uint64_t seed = 0;
    std::string out, plot;
    bool serial = false;
};

void run_ensemble_cmd(const EnsembleOpts& o) {
    EnsembleConfig config;
    config.d = o.d;
    config.N_values.assign(o.N_list.begin(), o.N_list.end());
    config.paths = o.paths;
    config.base_seed = o.seed;
    std::vector<EnsembleRecord> records =
        o.serial ? run_ensemble_serial(config) : run_ensemble(config);
    emit_csv(records, o.out);
    if (!o.plot.empty()) emit_plot_data(summarize(records, config), o.plot);
}

struct GelbrichOpts {
    double delta = 1.0;
    long long samples = 100000;
    std::uint64_t seed = 0;
    std::string out;
};

void run_gelbrich(const GelbrichOpts& o) {
    GelbrichInstance instance = build_counterexample(o.delta);
    MonteCarloEstimate mc = monte_carlo_counterexample_cost(o.delta, o.samples, o.seed);
    ordered_json j;
    j["analytic_gaussian"] = instance.analytic_gaussian_aw2;
    j["analytic_coupling"] = instance.analytic_coupling_cost;
    j["mc_estimate"] = mc.estimate;
    j["mc_se"] = mc.standard_error;
    j["bound_violated"] = mc.estimate + 3.0 * mc.standard_error < instance.analytic_gaussian_aw2;
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!o.out.empty()) write_text(text, o.out);
}

struct CheckOpts {
    long long trials = 100;
    std::uint64_t seed = 0;
};

void run_check(const CheckOpts& o) {
    if (o.trials < 1) throw InputError("trial count must be at least 1");
    std::mt19937_64 gen(o.seed);
    double worst_cost = 0.0, worst_procrustes = 0.0, worst_martingale = 0.0, worst_triangle = 0.0;
    for (long long i = 0; i < o.trials; ++i) {
        const Eigen::Index N = 1 + Eigen::Index(gen() % 4);
        const Eigen::Index d = 1 + Eigen::Index(gen() % 2);
        BlockLowerCholesky L = sample_ensemble_factor(N, d, gen());
        BlockLowerCholesky M = sample_ensemble_factor(N, d, gen());
        BlockLowerCholesky K = sample_ensemble_factor(N, d, gen());
        FilteredGaussianProcess X{L}, Y{M};

        const double d2 = dist_aw_squared(L, M);
        worst_cost = std::max(worst_cost,
                              std::abs(d2 - coupling_cost(X, Y, optimal_aw_correlation(L, M))));
        const double achieved = procrustes_optimizer(L, M).achieved_value;
        worst_procrustes = std::max(worst_procrustes, std::abs(d2 - achieved * achieved));

        BlockLowerCholesky Lm = martingale_projection(L);
        BlockLowerCholesky Mm = martingale_projection(M);
        worst_martingale = std::max(
            worst_martingale, std::abs(aw2_martingale_formula(Lm, Mm) - dist_aw(Lm, Mm)));

        worst_triangle = std::max(worst_triangle,
                                  dist_aw(L, M) - dist_aw(L, K) - dist_aw(K, M));
    }
    std::printf("coupling cost attains the distance: max gap %.3g over %lld trials\n", worst_cost,
                o.trials);
    std::printf("procrustes value matches: max gap %.3g\n", worst_procrustes);
    std::printf("martingale formula matches: max gap %.3g\n", worst_martingale);
    std::printf("triangle inequality slack: %.3g\n", worst_triangle);
    for (double delta : {0.5, 1.0, 2.0}) {
        GelbrichInstance ci = build_counterexample(delta);
        if (std::abs(ci.analytic_coupling_cost + 2.0 * delta - ci.analytic_gaussian_aw2) > 1e-12)
            throw NumericError("analytic gap identity failed");
    }
    std::printf("analytic gap identity holds\n");
    if (worst_cost > 1e-8 || worst_procrustes > 1e-8 || worst_martingale > 1e-8 ||
        worst_triangle > 1e-9)
        throw NumericError("an invariant check exceeded its tolerance");
    std::printf("all checks passed\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adapted optimal transport for discrete-time Gaussian processes"};
    app.require_subcommand(1);

    auto dist = std::make_shared<DistanceOpts>();
    CLI::App* cmd_distance = app.add_subcommand(
        "distance", "distance or divergence between two covariance or factor files");
    cmd_distance->add_option("kind", dist->kind, "one of bw, w2, aw, aw-laws, ab")
        ->required()
        ->check(CLI::IsMember({"bw", "w2", "aw", "aw-laws", "ab"}));
    cmd_distance->add_option("first", dist->first, "first input file")->required();
    cmd_distance->add_option("second", dist->second, "second input file")->required();
    cmd_distance->add_flag("--cov", dist->cov, "inputs are covariance matrices");
    cmd_distance->add_option("--report", dist->report,
                             "write per-block nuclear norms and the optimizer to this file");
    cmd_distance->callback([dist] { run_distance(*dist); });

    auto proj = std::make_shared<ProjectOpts>();
    CLI::App* cmd_project =
        app.add_subcommand("project", "project a factor onto a structured subclass");
    cmd_project->add_option("kind", proj->kind, "martingale or common-dynamics")
        ->required()
        ->check(CLI::IsMember({"martingale", "common-dynamics"}));
    cmd_project->add_option("input", proj->input, "input factor file")->required();
    cmd_project->add_option("output", proj->output, "output factor file")->required();
    cmd_project->add_option("--phi", proj->phi,
                            "file stacking the N-1 one-step transition blocks");
    cmd_project->callback([proj] { run_project(*proj); });

    auto geo = std::make_shared<GeodesicOpts>();
    CLI::App* cmd_geodesic =
        app.add_subcommand("geodesic", "constant-speed interpolation between two processes");
    cmd_geodesic->add_option("first", geo->first, "process at u = 0")->required();
    cmd_geodesic->add_option("second", geo->second, "process at u = 1")->required();
    cmd_geodesic->add_option("output", geo->output, "output process file")->required();
    cmd_geodesic->add_option("--u", geo->u, "interpolation parameter in [0, 1]")->required();
    cmd_geodesic->callback([geo] { run_geodesic(*geo); });

    CLI::App* cmd_coupling = app.add_subcommand("coupling", "build, evaluate, or sample couplings");
    cmd_coupling->require_subcommand(1);

    auto cb = std::make_shared<CouplingBuildOpts>();
    CLI::App* coupling_build =
        cmd_coupling->add_subcommand("build", "write a noise correlation file");
    coupling_build->add_option("kind", cb->kind, "one of sync, indep, aw, ab, bw")
        ->required()
        ->check(CLI::IsMember({"sync", "indep", "aw", "ab", "bw"}));
    coupling_build->add_option("first", cb->first, "first factor file")->required();
    coupling_build->add_option("second", cb->second, "second factor file")->required();
    coupling_build->add_option("output", cb->output, "output correlation file")->required();
    coupling_build->callback([cb] { run_coupling_build(*cb); });

    auto ce = std::make_shared<CouplingEvalOpts>();
    CLI::App* coupling_eval =
        cmd_coupling->add_subcommand("evaluate", "expected squared distance under a correlation");
    coupling_eval->add_option("first", ce->first, "first process file")->required();
    coupling_eval->add_option("second", ce->second, "second process file")->required();
    coupling_eval->add_option("correlation", ce->correlation, "correlation file")->required();
    coupling_eval->callback([ce] { run_coupling_evaluate(*ce); });

    auto cs = std::make_shared<CouplingSampleOpts>();
    CLI::App* coupling_sample =
        cmd_coupling->add_subcommand("sample", "draw coupled paths under a correlation");
    coupling_sample->add_option("first", cs->first, "first process file")->required();
    coupling_sample->add_option("second", cs->second, "second process file")->required();
    coupling_sample->add_option("correlation", cs->correlation, "correlation file")->required();
    coupling_sample->add_option("--n", cs->n, "number of coupled paths")->required();
    coupling_sample->add_option("--seed", cs->seed, "random seed")->required();
    coupling_sample->add_option("--out-x", cs->out_x, "output file for paths of the first process")
        ->required();
    coupling_sample->add_option("--out-y", cs->out_y, "output file for paths of the second process")
        ->required();
    coupling_sample->callback([cs] { run_coupling_sample(*cs); });

    auto ens = std::make_shared<EnsembleOpts>();
    CLI::App* cmd_ensemble =
        app.add_subcommand("ensemble", "random factor ensemble with closed-form transport costs");
    cmd_ensemble->add_option("--d", ens->d, "spatial dimension")->required();
    cmd_ensemble->add_option("--N-list", ens->N_list, "comma-separated horizons")
        ->required()
        ->delimiter(',');
    cmd_ensemble->add_option("--paths", ens->paths, "independent draws per horizon")->required();
    cmd_ensemble->add_option("--seed", ens->seed, "base seed")->required();
    cmd_ensemble->add_option("--out", ens->out, "output CSV file")->required();
    cmd_ensemble->add_option("--plot", ens->plot, "also write ratio quartiles to this CSV");
    cmd_ensemble->add_flag("--serial", ens->serial, "run on one thread");
    cmd_ensemble->callback([ens] { run_ensemble_cmd(*ens); });

    auto gel = std::make_shared<GelbrichOpts>();
    CLI::App* cmd_gelbrich = app.add_subcommand(
        "gelbrich", "covariance lower bound violation: analytic values and a Monte Carlo run");
    cmd_gelbrich->add_option("--delta", gel->delta, "instance parameter, positive")->required();
    cmd_gelbrich->add_option("--samples", gel->samples, "Monte Carlo sample count")->required();
    cmd_gelbrich->add_option("--seed", gel->seed, "random seed")->required();
    cmd_gelbrich->add_option("--out", gel->out, "also write the JSON report to this file");
    cmd_gelbrich->callback([gel] { run_gelbrich(*gel); });

    auto chk = std::make_shared<CheckOpts>();
    CLI::App* cmd_check = app.add_subcommand("check", "run randomized invariant suites");
    cmd_check->add_option("--trials", chk->trials, "instances per suite");
    cmd_check->add_option("--seed", chk->seed, "random seed")->required();
    cmd_check->callback([chk] { run_check(*chk); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
