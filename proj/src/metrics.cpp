#include "aot/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "aot/cholesky.h"
#include "aot/errors.h"

namespace aot {

namespace {

// scalar-step factor of a covariance matrix, one coordinate per step
BlockLowerCholesky scalar_step_factor(const Eigen::MatrixXd& A) {
    MinimalCholesky mc = minimal_cholesky(A);
    return BlockLowerCholesky::from_matrix(A.rows(), 1, mc.L);
}

double clamp_slack(const BlockLowerCholesky& L, const BlockLowerCholesky& M) {
    return 1e-9 * (1.0 + L.frob_squared() + M.frob_squared());
}

}  // namespace

double sqrt_clamped(double radicand, double slack) {
    if (radicand < -slack)
        throw NumericError("square root of negative value " + std::to_string(radicand));
    return std::sqrt(std::max(radicand, 0.0));
}

double bw_squared_factors(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M) {
    if (L.rows() != M.rows()) throw InputError("factors must have the same number of rows");
    double v = L.squaredNorm() + M.squaredNorm() - 2.0 * nuclear_norm(L.transpose() * M);
    return std::max(v, 0.0);
}

double bures_wasserstein(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != B.rows()) throw InputError("covariances must have the same size");
    MinimalCholesky fa = minimal_cholesky(A);
    MinimalCholesky fb = minimal_cholesky(B);
    double via_factors = bw_squared_factors(fa.L, fb.L);

    Eigen::MatrixXd ra = psd_sqrt(A);
    double via_roots = A.trace() + B.trace() - 2.0 * psd_sqrt(ra * B * ra).trace();
    // the root route loses half the digits on near-zero eigenvalues, so the
    // agreement check cannot be tighter than sqrt(machine epsilon) in scale
    if (std::abs(via_factors - std::max(via_roots, 0.0)) > 1e-6 * (1.0 + A.trace() + B.trace()))
        throw NumericError("covariance distance routes disagree");
    return sqrt_clamped(via_factors);
}

double w2_gaussian(const Eigen::VectorXd& a, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                   const Eigen::MatrixXd& B) {
    if (a.size() != A.rows() || b.size() != B.rows())
        throw InputError("mean length does not match covariance size");
    double bw = bures_wasserstein(A, B);
    return sqrt_clamped((a - b).squaredNorm() + bw * bw);
}

double dist_aw_squared(const BlockLowerCholesky& L, const BlockLowerCholesky& M) {
    require_same_shape(L, M);
    double cross = 0.0;
    for (Eigen::Index t = 0; t < L.N; ++t)
        cross += nuclear_norm(BlockLowerCholesky::cross_diag_block(L, M, t));
    return L.frob_squared() + M.frob_squared() - 2.0 * cross;
}

double dist_aw(const BlockLowerCholesky& L, const BlockLowerCholesky& M) {
    return sqrt_clamped(dist_aw_squared(L, M), clamp_slack(L, M));
}

double aw2_filtered(const FilteredGaussianProcess& X, const FilteredGaussianProcess& Y) {
    double v = (X.mean - Y.mean).squaredNorm() + dist_aw_squared(X.factor, Y.factor);
    return sqrt_clamped(v, clamp_slack(X.factor, Y.factor));
}

double aw2_gaussian_laws(const Eigen::VectorXd& a, const Eigen::MatrixXd& A,
                         const Eigen::VectorXd& b, const Eigen::MatrixXd& B) {
    if (a.size() != A.rows() || b.size() != B.rows())
        throw InputError("mean length does not match covariance size");
    FilteredGaussianProcess X(a, scalar_step_factor(A));
    FilteredGaussianProcess Y(b, scalar_step_factor(B));
    return aw2_filtered(X, Y);
}

std::optional<Eigen::MatrixXd> aw_equivalence(const BlockLowerCholesky& L,
                                              const BlockLowerCholesky& M, double tol) {
    require_same_shape(L, M);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(L.size(), L.size());
    for (Eigen::Index t = 0; t < L.N; ++t) {
        SvdResult s = svd(BlockLowerCholesky::cross_diag_block(L, M, t));
        Q.block(t * L.d, t * L.d, L.d, L.d) = s.U * s.V.transpose();
    }
    if ((L.A * Q - M.A).norm() > tol * (1.0 + L.A.norm())) return std::nullopt;
    return Q;
}

ProcrustesSolution procrustes_optimizer(const BlockLowerCholesky& L, const BlockLowerCholesky& M,
                                        double rank_tol) {
    require_same_shape(L, M);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(L.size(), L.size());
    for (Eigen::Index t = 0; t < L.N; ++t) {
        TraceMaxResult r = trace_max_set(BlockLowerCholesky::cross_diag_block(L, M, t), rank_tol);
        Q.block(t * L.d, t * L.d, L.d, L.d) = r.set.canonical();
    }
    return {Q, (L.A - M.A * Q).norm()};
}

FilteredGaussianProcess geodesic_point(const FilteredGaussianProcess& X0,
                                       const FilteredGaussianProcess& X1, double u) {
    if (!(u >= 0.0 && u <= 1.0))
        throw InputError("interpolation parameter must lie in [0,1]");
    ProcrustesSolution sol = procrustes_optimizer(X0.factor, X1.factor);
    BlockLowerCholesky fu = X0.factor;
    fu.A += u * (X1.factor.A * sol.Q - X0.factor.A);
    return FilteredGaussianProcess((1.0 - u) * X0.mean + u * X1.mean, std::move(fu));
}

double aw2_martingale_formula(const BlockLowerCholesky& L, const BlockLowerCholesky& M) {
    require_same_shape(L, M);
    if (!is_martingale(L) || !is_martingale(M))
        throw InputError("factors must have constant column blocks below the diagonal");
    double acc = 0.0;
    for (Eigen::Index t = 0; t < L.N; ++t)
        acc += double(L.N - t) * bw_squared_factors(L.block(t, t), M.block(t, t));
    return sqrt_clamped(acc, clamp_slack(L, M));
}

}  // namespace aot
