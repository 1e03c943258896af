#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aot/block_cholesky.h"

namespace aot {

struct EnsembleConfig {
    Eigen::Index d = 1;
    std::vector<Eigen::Index> N_values;
    Eigen::Index paths = 100;
    std::uint64_t base_seed = 0;
    // ratio curves to aggregate in summaries; every record always carries all
    // cost columns regardless of this selection
    std::vector<std::string> couplings = {"sync", "indep", "aw", "ab", "bw"};
};

// one independently drawn factor pair, with every transport cost evaluated
// in closed form
struct EnsembleRecord {
    Eigen::Index N = 0;
    Eigen::Index path_index = 0;
    double cost_sync = 0.0;
    double cost_indep = 0.0;
    double cost_aw = 0.0;
    double cost_ab = 0.0;
    double bw2 = 0.0;
    double aw2 = 0.0;
    double frobL2 = 0.0;
    double frobM2 = 0.0;
    double nuc_diag = 0.0;
    double cross_frob2 = 0.0;

    bool operator==(const EnsembleRecord&) const = default;
};

// quartiles of one cost ratio (numerator family over aw2) at one horizon
struct SummaryRow {
    Eigen::Index N = 0;
    std::string ratio;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

// scaled statistics whose large-N limits are known in closed form
struct AsymptoticsRow {
    Eigen::Index N = 0;
    double frob_scaled_median = 0.0;  // (1/N^2) ||L||_F^2, limit d^2/2
    double frob_scaled_iqr = 0.0;
    double nuc_diag_scaled_median = 0.0;  // (1/N^2) sum_t ||(L^T M)_{t,t}||_*, limit 0
    double nuc_diag_scaled_iqr = 0.0;
    double cross_scaled_median = 0.0;  // (1/N^3) ||L^T M||_F^2, limit d^3/3
    double cross_scaled_iqr = 0.0;
};

// deterministic seeds for the two independent factors of one path, so that
// results do not depend on execution order or worker count
std::pair<std::uint64_t, std::uint64_t> ensemble_pair_seeds(std::uint64_t base_seed,
                                                            Eigen::Index N,
                                                            Eigen::Index path_index);

// block-lower factor with i.i.d. standard normal entries in every block on or
// below the diagonal (diagonal blocks fully dense)
BlockLowerCholesky sample_ensemble_factor(Eigen::Index N, Eigen::Index d, std::uint64_t seed);

EnsembleRecord make_ensemble_record(Eigen::Index N, Eigen::Index path_index,
                                    const BlockLowerCholesky& L, const BlockLowerCholesky& M);

// parallel when built with OpenMP; the serial variant is the reference the
// parallel one must match byte for byte after emission
std::vector<EnsembleRecord> run_ensemble(const EnsembleConfig& config);
std::vector<EnsembleRecord> run_ensemble_serial(const EnsembleConfig& config);

std::vector<SummaryRow> summarize(const std::vector<EnsembleRecord>& records,
                                  const EnsembleConfig& config);

std::vector<AsymptoticsRow> verify_asymptotics(const EnsembleConfig& config);

// order statistic with linear interpolation between adjacent ranks
double quantile(std::vector<double> values, double q);

void emit_csv(const std::vector<EnsembleRecord>& records, const std::string& path);
std::vector<EnsembleRecord> parse_csv(const std::string& path);
void emit_plot_data(const std::vector<SummaryRow>& summary, const std::string& path);

}  // namespace aot
