#include "aot/linalg.h"

#include <cmath>

namespace aot {

namespace {

// below this size JacobiSVD is cheap and fully accurate; above it, singular
// values come from the symmetric eigenproblem of C^T C (or C C^T)
constexpr Eigen::Index kDirectSvdLimit = 64;

void apply_sign_convention(Eigen::MatrixXd& U, Eigen::MatrixXd& V) {
    const Eigen::Index paired = std::min(U.cols(), V.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
        for (Eigen::Index i = 0; i < U.rows(); ++i) {
            if (std::abs(U(i, j)) > 1e-12) {
                if (U(i, j) < 0.0) {
                    U.col(j) = -U.col(j);
                    if (j < paired) V.col(j) = -V.col(j);
                }
                break;
            }
        }
    }
    // surplus right vectors (input wider than tall) get the same normalization
    for (Eigen::Index j = U.cols(); j < V.cols(); ++j) {
        for (Eigen::Index i = 0; i < V.rows(); ++i) {
            if (std::abs(V(i, j)) > 1e-12) {
                if (V(i, j) < 0.0) V.col(j) = -V.col(j);
                break;
            }
        }
    }
}

Eigen::VectorXd singular_values_large(const Eigen::MatrixXd& C) {
    // eigenvalues of the smaller Gram matrix; sqrt with clamping at zero
    Eigen::MatrixXd G;
    if (C.rows() >= C.cols())
        G = C.transpose() * C;
    else
        G = C * C.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigen decomposition did not converge");
    Eigen::VectorXd lam = es.eigenvalues();  // ascending
    Eigen::VectorXd sv(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        sv(i) = std::sqrt(std::max(lam(lam.size() - 1 - i), 0.0));
    return sv;  // descending
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& C) {
    if (std::max(C.rows(), C.cols()) <= kDirectSvdLimit) {
        Eigen::JacobiSVD<Eigen::MatrixXd> dec(C);
        if (dec.info() != Eigen::Success) throw NumericError("svd did not converge");
        return dec.singularValues();
    }
    return singular_values_large(C);
}

}  // namespace

SvdResult svd(const Eigen::MatrixXd& C) {
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (dec.info() != Eigen::Success) throw NumericError("svd did not converge");
    SvdResult r{dec.matrixU(), dec.singularValues(), dec.matrixV()};
    apply_sign_convention(r.U, r.V);
    return r;
}

double nuclear_norm(const Eigen::MatrixXd& C) { return singular_values(C).sum(); }

double spectral_norm(const Eigen::MatrixXd& C) {
    if (C.size() == 0) return 0.0;
    return singular_values(C)(0);
}

double frobenius_norm(const Eigen::MatrixXd& C) { return C.norm(); }

bool is_correlation(const Eigen::MatrixXd& C, double tol) {
    if (C.rows() != C.cols()) throw InputError("correlation test requires a square matrix");
    return spectral_norm(C) <= 1.0 + tol;
}

double default_rank_tol(Eigen::Index n) { return double(n) * std::ldexp(1.0, -40); }

Eigen::MatrixXd TraceOptimizerSet::member(const Eigen::MatrixXd& K) const {
    if (K.rows() != kernel_right.cols() || K.cols() != kernel_left.cols())
        throw InputError("optimizer member requires a (n-r) x (n-r) contraction");
    return base + kernel_right * K * kernel_left.transpose();
}

Eigen::MatrixXd TraceOptimizerSet::canonical() const {
    return member(Eigen::MatrixXd::Identity(kernel_right.cols(), kernel_left.cols()));
}

TraceMaxResult trace_max_set(const Eigen::MatrixXd& C, double rank_tol) {
    if (C.rows() != C.cols()) throw InputError("trace maximization requires a square matrix");
    const Eigen::Index n = C.rows();
    if (rank_tol < 0.0) rank_tol = default_rank_tol(n);

    SvdResult dec = svd(C);
    const double top = dec.sigma.size() > 0 ? dec.sigma(0) : 0.0;
    Eigen::Index r = 0;
    while (r < dec.sigma.size() && dec.sigma(r) > rank_tol * top && dec.sigma(r) > 0.0) ++r;

    TraceMaxResult out;
    out.value = dec.sigma.sum();
    out.set.rank = r;
    out.set.base = dec.V.leftCols(r) * dec.U.leftCols(r).transpose();
    out.set.kernel_left = dec.U.rightCols(n - r);
    out.set.kernel_right = dec.V.rightCols(n - r);
    return out;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    if (es.info() != Eigen::Success) throw NumericError("eigen decomposition did not converge");
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = std::sqrt(std::max(lam(i), 0.0));
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace aot
