#pragma once

#include <Eigen/Dense>

#include "aot/errors.h"

namespace aot {

// Deterministic full SVD, C = U * diag(sigma) * V^T with square orthogonal frames.
// Sign convention: the first nonzero entry of each left singular vector is
// non-negative (the matching right vector is flipped along with it).
struct SvdResult {
    Eigen::MatrixXd U;
    Eigen::VectorXd sigma;  // descending, >= 0
    Eigen::MatrixXd V;
};

SvdResult svd(const Eigen::MatrixXd& C);

double nuclear_norm(const Eigen::MatrixXd& C);
double spectral_norm(const Eigen::MatrixXd& C);
double frobenius_norm(const Eigen::MatrixXd& C);

// true iff the spectral norm is at most 1 + tol; such matrices are exactly the
// admissible cross-correlations of a pair of standard Gaussian vectors
bool is_correlation(const Eigen::MatrixXd& C, double tol = 1e-9);

// sentinel: resolve to default_rank_tol(n) at the call site
inline constexpr double kAutoRankTol = -1.0;

// relative threshold under which singular values count as zero
double default_rank_tol(Eigen::Index n);

// Optimizer set of max tr(C*P) over contractions P, value ||C||_*.
// Members are base + kernel_right * K * kernel_left^T for any contraction K of
// size (n-r) x (n-r); K = I gives the canonical orthogonal member V*U^T.
struct TraceOptimizerSet {
    Eigen::MatrixXd base;          // V1 * U1^T
    Eigen::MatrixXd kernel_left;   // U0, n x (n-r)
    Eigen::MatrixXd kernel_right;  // V0, n x (n-r)
    Eigen::Index rank = 0;

    Eigen::MatrixXd member(const Eigen::MatrixXd& K) const;
    Eigen::MatrixXd canonical() const;  // K = I
};

struct TraceMaxResult {
    double value = 0.0;  // nuclear norm of C
    TraceOptimizerSet set;
};

TraceMaxResult trace_max_set(const Eigen::MatrixXd& C, double rank_tol = kAutoRankTol);

// PSD square root via symmetric eigendecomposition, eigenvalues clamped at 0
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A);

}  // namespace aot
