#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "aot/block_cholesky.h"
#include "aot/linalg.h"
#include "aot/process.h"

namespace aot {

// block-diagonal noise correlation diag(P_1, ..., P_N); the parameter of a
// jointly Gaussian bicausal coupling, with P_t = E[eps^Y_t (eps^X_t)^T]
struct BlockCorrelation {
    std::vector<Eigen::MatrixXd> blocks;

    BlockCorrelation() = default;
    explicit BlockCorrelation(std::vector<Eigen::MatrixXd> b) : blocks(std::move(b)) {}

    static BlockCorrelation identity(Eigen::Index N, Eigen::Index d);  // synchronous
    static BlockCorrelation zero(Eigen::Index N, Eigen::Index d);      // independent

    Eigen::Index steps() const { return Eigen::Index(blocks.size()); }
    Eigen::MatrixXd dense() const;
};

// a general square correlation E[eps^Y (eps^X)^T], used for couplings that
// ignore the step structure
using FullCorrelation = Eigen::MatrixXd;

// blocks must be square, of one common size, and contractions up to tol
void validate_correlation(const BlockCorrelation& P, double tol = 1e-9);
void validate_correlation(const FullCorrelation& P, double tol = 1e-9);

// expected squared distance E||X - Y||^2 under the coupling with noise
// correlation P: ||a-b||^2 + ||L||_F^2 + ||M||_F^2 - 2 sum_t tr((L^T M)_{t,t} P_t)
double coupling_cost(const FilteredGaussianProcess& X, const FilteredGaussianProcess& Y,
                     const BlockCorrelation& P);
double coupling_cost(const FilteredGaussianProcess& X, const FilteredGaussianProcess& Y,
                     const FullCorrelation& P);

// per-step canonical trace maximizer for (L^T M)_{t,t}; attains the adapted
// distance
BlockCorrelation optimal_aw_correlation(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                                        double rank_tol = kAutoRankTol);

// canonical trace maximizer for the whole of L^T M; attains the classical
// distance between the path laws but is not bicausal in general
FullCorrelation classical_brenier_correlation(const BlockLowerCholesky& L,
                                              const BlockLowerCholesky& M,
                                              double rank_tol = kAutoRankTol);

// the coupling induced by the per-step monotone transport map: the rotation
// part is fixed by the diagonal blocks L_{t,t}^T M_{t,t}, and the freedom on
// their kernels is spent maximizing the trace against (L^T M)_{t,t}
BlockCorrelation adapted_brenier_correlation(const BlockLowerCholesky& L,
                                             const BlockLowerCholesky& M,
                                             double rank_tol = kAutoRankTol);

// expected squared displacement under the adapted Brenier coupling (a squared
// quantity; at least the squared adapted distance, with equality iff the
// coupling is optimal)
double adapted_brenier_divergence(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                                  double rank_tol = kAutoRankTol);

// whether the adapted Brenier coupling attains the adapted distance: per step
// the achieved trace must reach the nuclear norm of (L^T M)_{t,t}
bool ab_attains_aw(const BlockLowerCholesky& L, const BlockLowerCholesky& M, double tol = 1e-9);

// n joint draws of (X, Y) under the coupling with correlation P, one sample
// per row; per step, eps^Y_t = P_t eps^X_t + (I - P_t P_t^T)^{1/2} eta_t
struct CoupledPaths {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
};
CoupledPaths sample_coupled_paths(const FilteredGaussianProcess& X,
                                  const FilteredGaussianProcess& Y, const BlockCorrelation& P,
                                  Eigen::Index n, std::uint64_t seed);

}  // namespace aot
