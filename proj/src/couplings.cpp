#include "aot/couplings.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "aot/errors.h"
#include "aot/rng.h"

namespace aot {

namespace {

void check_blocks_match(const BlockCorrelation& P, const BlockLowerCholesky& L) {
    if (P.steps() != L.N) throw InputError("correlation step count does not match the factors");
    if (!P.blocks.empty() && P.blocks.front().rows() != L.d)
        throw InputError("correlation block size does not match the factors");
}

// sum_t tr((L^T M)_{t,t} P_t)
double cross_trace(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                   const BlockCorrelation& P) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < L.N; ++t)
        acc += (BlockLowerCholesky::cross_diag_block(L, M, t) * P.blocks[std::size_t(t)]).trace();
    return acc;
}

}  // namespace

BlockCorrelation BlockCorrelation::identity(Eigen::Index N, Eigen::Index d) {
    if (N < 1 || d < 1) throw InputError("correlation needs at least one step and one dimension");
    BlockCorrelation P;
    P.blocks.assign(std::size_t(N), Eigen::MatrixXd::Identity(d, d));
    return P;
}

BlockCorrelation BlockCorrelation::zero(Eigen::Index N, Eigen::Index d) {
    if (N < 1 || d < 1) throw InputError("correlation needs at least one step and one dimension");
    BlockCorrelation P;
    P.blocks.assign(std::size_t(N), Eigen::MatrixXd::Zero(d, d));
    return P;
}

Eigen::MatrixXd BlockCorrelation::dense() const {
    Eigen::Index n = 0;
    for (const Eigen::MatrixXd& B : blocks) {
        if (B.rows() != B.cols()) throw InputError("correlation blocks must be square");
        n += B.rows();
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index at = 0;
    for (const Eigen::MatrixXd& B : blocks) {
        D.block(at, at, B.rows(), B.rows()) = B;
        at += B.rows();
    }
    return D;
}

void validate_correlation(const BlockCorrelation& P, double tol) {
    if (P.blocks.empty()) throw InputError("correlation has no blocks");
    Eigen::Index d = P.blocks.front().rows();
    for (const Eigen::MatrixXd& B : P.blocks)
        if (B.rows() != B.cols() || B.rows() != d)
            throw InputError("correlation blocks must be square and of one size");
    for (const Eigen::MatrixXd& B : P.blocks)
        if (spectral_norm(B) > 1.0 + tol)
            throw NumericError("correlation block exceeds unit spectral norm");
}

void validate_correlation(const FullCorrelation& P, double tol) {
    if (P.rows() != P.cols()) throw InputError("correlation matrix must be square");
    if (spectral_norm(P) > 1.0 + tol)
        throw NumericError("correlation matrix exceeds unit spectral norm");
}

double coupling_cost(const FilteredGaussianProcess& X, const FilteredGaussianProcess& Y,
                     const BlockCorrelation& P) {
    require_same_shape(X.factor, Y.factor);
    check_blocks_match(P, X.factor);
    validate_correlation(P);
    return (X.mean - Y.mean).squaredNorm() + X.factor.frob_squared() + Y.factor.frob_squared() -
           2.0 * cross_trace(X.factor, Y.factor, P);
}

double coupling_cost(const FilteredGaussianProcess& X, const FilteredGaussianProcess& Y,
                     const FullCorrelation& P) {
    require_same_shape(X.factor, Y.factor);
    if (P.rows() != X.factor.size() || P.cols() != X.factor.size())
        throw InputError("correlation size does not match the factors");
    validate_correlation(P);
    double cross = (X.factor.A.transpose() * Y.factor.A * P).trace();
    return (X.mean - Y.mean).squaredNorm() + X.factor.frob_squared() + Y.factor.frob_squared() -
           2.0 * cross;
}

BlockCorrelation optimal_aw_correlation(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                                        double rank_tol) {
    require_same_shape(L, M);
    BlockCorrelation P;
    P.blocks.reserve(std::size_t(L.N));
    for (Eigen::Index t = 0; t < L.N; ++t) {
        TraceMaxResult r = trace_max_set(BlockLowerCholesky::cross_diag_block(L, M, t), rank_tol);
        P.blocks.push_back(r.set.canonical());
    }
    return P;
}

FullCorrelation classical_brenier_correlation(const BlockLowerCholesky& L,
                                              const BlockLowerCholesky& M, double rank_tol) {
    require_same_shape(L, M);
    return trace_max_set(L.A.transpose() * M.A, rank_tol).set.canonical();
}

BlockCorrelation adapted_brenier_correlation(const BlockLowerCholesky& L,
                                             const BlockLowerCholesky& M, double rank_tol) {
    require_same_shape(L, M);
    BlockCorrelation P;
    P.blocks.reserve(std::size_t(L.N));
    for (Eigen::Index t = 0; t < L.N; ++t) {
        TraceMaxResult frames =
            trace_max_set(L.block(t, t).transpose() * M.block(t, t), rank_tol);
        Eigen::MatrixXd K(0, 0);
        if (frames.set.kernel_left.cols() > 0) {
            Eigen::MatrixXd G = frames.set.kernel_left.transpose() *
                                BlockLowerCholesky::cross_diag_block(L, M, t) *
                                frames.set.kernel_right;
            K = trace_max_set(G, rank_tol).set.canonical();
        }
        P.blocks.push_back(frames.set.member(K));
    }
    return P;
}

double adapted_brenier_divergence(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                                  double rank_tol) {
    BlockCorrelation P = adapted_brenier_correlation(L, M, rank_tol);
    return L.frob_squared() + M.frob_squared() - 2.0 * cross_trace(L, M, P);
}

bool ab_attains_aw(const BlockLowerCholesky& L, const BlockLowerCholesky& M, double tol) {
    BlockCorrelation P = adapted_brenier_correlation(L, M);
    for (Eigen::Index t = 0; t < L.N; ++t) {
        Eigen::MatrixXd C = BlockLowerCholesky::cross_diag_block(L, M, t);
        double achieved = (C * P.blocks[std::size_t(t)]).trace();
        double best = nuclear_norm(C);
        if (achieved < best - tol * (1.0 + best)) return false;
    }
    return true;
}

CoupledPaths sample_coupled_paths(const FilteredGaussianProcess& X,
                                  const FilteredGaussianProcess& Y, const BlockCorrelation& P,
                                  Eigen::Index n, std::uint64_t seed) {
    require_same_shape(X.factor, Y.factor);
    if (n < 1) throw InputError("sample count must be at least 1");
    check_blocks_match(P, X.factor);
    validate_correlation(P);

    const Eigen::Index N = X.factor.N, d = X.factor.d, m = N * d;

    // conditional square roots (I - P_t P_t^T)^{1/2}, with the definiteness
    // check before clamping
    std::vector<Eigen::MatrixXd> roots;
    roots.reserve(std::size_t(N));
    for (const Eigen::MatrixXd& B : P.blocks) {
        Eigen::MatrixXd S = Eigen::MatrixXd::Identity(d, d) - B * B.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
        if (es.eigenvalues().minCoeff() < -1e-9)
            throw NumericError("conditional noise covariance is indefinite");
        roots.push_back(es.eigenvectors() *
                        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                        es.eigenvectors().transpose());
    }

    std::mt19937_64 gen(seed);
    Eigen::MatrixXd eps(m, n), xi(m, n);
    fill_standard_normal(eps, gen);
    fill_standard_normal(xi, gen);

    Eigen::MatrixXd eta(m, n);
    for (Eigen::Index t = 0; t < N; ++t)
        eta.middleRows(t * d, d) = P.blocks[std::size_t(t)] * eps.middleRows(t * d, d) +
                                   roots[std::size_t(t)] * xi.middleRows(t * d, d);

    CoupledPaths out;
    out.x = (X.factor.A * eps).transpose();
    out.x.rowwise() += X.mean.transpose();
    out.y = (Y.factor.A * eta).transpose();
    out.y.rowwise() += Y.mean.transpose();
    return out;
}

}  // namespace aot
