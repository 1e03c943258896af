#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aot/block_cholesky.h"

namespace aot {

// mean vector plus driving factor: the law is N(mean, L L^T) with the
// filtration generated by the noise increments
struct FilteredGaussianProcess {
    Eigen::VectorXd mean;
    BlockLowerCholesky factor;

    FilteredGaussianProcess() = default;
    explicit FilteredGaussianProcess(BlockLowerCholesky L)
        : mean(Eigen::VectorXd::Zero(L.size())), factor(std::move(L)) {}
    FilteredGaussianProcess(Eigen::VectorXd a, BlockLowerCholesky L);

    Eigen::VectorXd mean_step(Eigen::Index t) const { return mean.segment(t * factor.d, factor.d); }
};

struct MarkovTransition {
    std::vector<Eigen::MatrixXd> phi;  // one d x d matrix per step 1..N-1
    std::vector<double> residuals;     // least-squares residual per step
};

// factor-level test: every column block is constant below the diagonal block
bool is_martingale(const BlockLowerCholesky& L, double tol = 1e-9);
// process-level test adds equality of the mean blocks
bool is_martingale(const FilteredGaussianProcess& X, double tol = 1e-9);

// fits each one-step transition by minimum-norm least squares; the process is
// Markov iff all residuals are small relative to the factor size
std::pair<bool, MarkovTransition> is_markov(const FilteredGaussianProcess& X, double tol = 1e-8);
std::pair<bool, MarkovTransition> is_markov(const BlockLowerCholesky& L, double tol = 1e-8);

// nearest martingale factor: each column block is replaced by its average,
// repeated down the column
BlockLowerCholesky martingale_projection(const BlockLowerCholesky& L);

// nearest factor whose column blocks follow the given one-step dynamics
// M_{s+1,t} = Phi_s M_{s,t}; phi = I reduces to the martingale projection
BlockLowerCholesky common_dynamics_projection(const BlockLowerCholesky& L,
                                              const std::vector<Eigen::MatrixXd>& phi);

// one path per row: a + L * eps with standard normal eps, reproducible per seed
Eigen::MatrixXd sample_paths(const FilteredGaussianProcess& X, Eigen::Index n, std::uint64_t seed);

}  // namespace aot
