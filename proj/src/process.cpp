#include "aot/process.h"

#include <cmath>

#include "aot/rng.h"

namespace aot {

BlockLowerCholesky BlockLowerCholesky::from_matrix(Eigen::Index steps, Eigen::Index dim,
                                                   const Eigen::MatrixXd& M) {
    BlockLowerCholesky out(steps, dim);
    if (M.rows() != steps * dim || M.cols() != steps * dim)
        throw InputError("matrix size does not match the block dimensions");
    for (Eigen::Index s = 0; s < steps; ++s)
        for (Eigen::Index t = s + 1; t < steps; ++t)
            if (!M.block(s * dim, t * dim, dim, dim).isZero(0.0))
                throw InputError("nonzero block above the block diagonal");
    out.A = M;
    return out;
}

FilteredGaussianProcess::FilteredGaussianProcess(Eigen::VectorXd a, BlockLowerCholesky L)
    : mean(std::move(a)), factor(std::move(L)) {
    if (mean.size() != factor.size()) throw InputError("mean length does not match the factor");
}

bool is_martingale(const BlockLowerCholesky& L, double tol) {
    for (Eigen::Index t = 0; t < L.N; ++t)
        for (Eigen::Index s = t + 1; s < L.N; ++s)
            if ((L.block(s, t) - L.block(t, t)).norm() > tol) return false;
    return true;
}

bool is_martingale(const FilteredGaussianProcess& X, double tol) {
    for (Eigen::Index t = 1; t < X.factor.N; ++t)
        if ((X.mean_step(t) - X.mean_step(0)).norm() > tol) return false;
    return is_martingale(X.factor, tol);
}

std::pair<bool, MarkovTransition> is_markov(const BlockLowerCholesky& L, double tol) {
    const Eigen::Index N = L.N, d = L.d;
    MarkovTransition trans;
    bool ok = true;
    const double scale = 1.0 + L.A.norm();

    for (Eigen::Index t = 0; t + 1 < N; ++t) {
        // solve Phi * [L_{t,0} ... L_{t,t}] = [L_{t+1,0} ... L_{t+1,t}]
        Eigen::MatrixXd R = L.A.block(t * d, 0, d, (t + 1) * d);
        Eigen::MatrixXd S = L.A.block((t + 1) * d, 0, d, (t + 1) * d);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(R.transpose());
        Eigen::MatrixXd phi = cod.solve(S.transpose()).transpose();
        double res = (phi * R - S).norm();
        trans.phi.push_back(phi);
        trans.residuals.push_back(res);
        if (res > tol * scale) ok = false;
    }
    return {ok, trans};
}

std::pair<bool, MarkovTransition> is_markov(const FilteredGaussianProcess& X, double tol) {
    return is_markov(X.factor, tol);
}

BlockLowerCholesky martingale_projection(const BlockLowerCholesky& L) {
    BlockLowerCholesky out(L.N, L.d);
    for (Eigen::Index t = 0; t < L.N; ++t) {
        Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(L.d, L.d);
        for (Eigen::Index s = t; s < L.N; ++s) avg += L.block(s, t);
        avg /= double(L.N - t);
        for (Eigen::Index s = t; s < L.N; ++s) out.set_block(s, t, avg);
    }
    return out;
}

BlockLowerCholesky common_dynamics_projection(const BlockLowerCholesky& L,
                                              const std::vector<Eigen::MatrixXd>& phi) {
    const Eigen::Index N = L.N, d = L.d;
    if (Eigen::Index(phi.size()) != N - 1) throw InputError("need one transition per step");
    for (const auto& p : phi)
        if (p.rows() != d || p.cols() != d) throw InputError("transition blocks must be d x d");

    BlockLowerCholesky out(N, d);
    for (Eigen::Index t = 0; t < N; ++t) {
        // W_s = phi_{s-1} ... phi_t stacked over s = t..N-1; least squares for
        // the free diagonal block against the stacked column of L
        const Eigen::Index rows = (N - t) * d;
        Eigen::MatrixXd W(rows, d);
        Eigen::MatrixXd cur = Eigen::MatrixXd::Identity(d, d);
        W.block(0, 0, d, d) = cur;
        for (Eigen::Index s = t + 1; s < N; ++s) {
            cur = phi[s - 1] * cur;
            W.block((s - t) * d, 0, d, d) = cur;
        }
        Eigen::MatrixXd B =
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(W).solve(L.column_tail(t));
        for (Eigen::Index s = t; s < N; ++s)
            out.set_block(s, t, W.block((s - t) * d, 0, d, d) * B);
    }
    return out;
}

Eigen::MatrixXd sample_paths(const FilteredGaussianProcess& X, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw InputError("need at least one path");
    const Eigen::Index m = X.factor.size();
    std::mt19937_64 gen(seed);
    Eigen::MatrixXd eps(m, n);
    fill_standard_normal(eps, gen);
    Eigen::MatrixXd paths = (X.factor.A * eps).transpose();
    paths.rowwise() += X.mean.transpose();
    return paths;
}

}  // namespace aot
