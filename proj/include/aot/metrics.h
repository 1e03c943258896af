#pragma once

#include <optional>

#include <Eigen/Dense>

#include "aot/block_cholesky.h"
#include "aot/linalg.h"
#include "aot/process.h"

namespace aot {

// Wasserstein-2 between centered Gaussians as a function of covariances.
// Computed through two independent routes (matrix square roots, and factor
// nuclear norms) which must agree; disagreement raises NumericError.
double bures_wasserstein(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// squared value from factors only, nuclear-norm route; no PSD factorization
double bw_squared_factors(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M);

// full Wasserstein-2 between Gaussian laws: mean term plus covariance term
double w2_gaussian(const Eigen::VectorXd& a, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                   const Eigen::MatrixXd& B);

// the closed-form pseudo-metric on block factors:
// sqrt(||L||_F^2 + ||M||_F^2 - 2 sum_t ||(L^T M)_{t,t}||_*)
double dist_aw(const BlockLowerCholesky& L, const BlockLowerCholesky& M);
double dist_aw_squared(const BlockLowerCholesky& L, const BlockLowerCholesky& M);

// adapted Wasserstein-2 between filtered Gaussian processes
double aw2_filtered(const FilteredGaussianProcess& X, const FilteredGaussianProcess& Y);

// adapted Wasserstein-2 between Gaussian laws, through minimal factors
double aw2_gaussian_laws(const Eigen::VectorXd& a, const Eigen::MatrixXd& A,
                         const Eigen::VectorXd& b, const Eigen::MatrixXd& B);

// if the factors are at distance <= tol, a block rotation with M = L Q,
// recovered per column block by polar decomposition; otherwise nothing
std::optional<Eigen::MatrixXd> aw_equivalence(const BlockLowerCholesky& L,
                                              const BlockLowerCholesky& M, double tol = 1e-9);

// block-orthogonal Q minimizing ||L - M Q||_F; the minimum equals dist_aw
struct ProcrustesSolution {
    Eigen::MatrixXd Q;      // Nd x Nd block-diagonal orthogonal
    double achieved_value;  // ||L - M Q||_F
};
ProcrustesSolution procrustes_optimizer(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                                        double rank_tol = kAutoRankTol);

// constant-speed interpolation X0 -> X1 after aligning X1 by the Procrustes
// rotation; u in [0,1]
FilteredGaussianProcess geodesic_point(const FilteredGaussianProcess& X0,
                                       const FilteredGaussianProcess& X1, double u);

// distance between martingale factors via the weighted per-step formula
// sum_t (N - t + 1) BW^2(L_{t,t} L_{t,t}^T, M_{t,t} M_{t,t}^T)
double aw2_martingale_formula(const BlockLowerCholesky& L, const BlockLowerCholesky& M);

// shared radicand handling: clamp tiny negatives, reject large ones
double sqrt_clamped(double radicand, double slack = 1e-9);

}  // namespace aot
