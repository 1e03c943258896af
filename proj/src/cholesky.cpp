#include "aot/cholesky.h"

#include <cmath>

namespace aot {

MinimalCholesky minimal_cholesky(const Eigen::MatrixXd& A, double psd_tol) {
    if (A.rows() != A.cols()) throw InputError("cholesky factorization requires a square matrix");
    const Eigen::Index n = A.rows();

    const double scale = std::max(A.cwiseAbs().maxCoeff(), 0.0);
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + scale))
        throw NumericError("matrix is not symmetric");

    Eigen::MatrixXd W = 0.5 * (A + A.transpose());
    const double max_diag = std::max(W.diagonal().maxCoeff(), 0.0);
    const double zero_thresh = psd_tol * max_diag;
    // factoring a genuinely small pivot amplifies roundoff in its Schur update
    // by (max_diag / pivot)^(1/2), so pivots between the two thresholds are
    // treated as zero rather than rejected
    const double indefinite_thresh = 1e-8 * max_diag;

    MinimalCholesky out;
    out.L = Eigen::MatrixXd::Zero(n, n);

    // outer-product form; a zeroed pivot writes an exact zero column and its
    // Schur update is skipped entirely
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = W(j, j);
        if (pivot < -indefinite_thresh)
            throw NumericError("matrix is not positive semidefinite");
        if (pivot <= zero_thresh) continue;

        const double root = std::sqrt(pivot);
        out.L(j, j) = root;
        out.active.push_back(j);
        if (j + 1 < n) {
            Eigen::VectorXd col = W.col(j).segment(j + 1, n - j - 1) / root;
            out.L.col(j).segment(j + 1, n - j - 1) = col;
            W.block(j + 1, j + 1, n - j - 1, n - j - 1) -= col * col.transpose();
        }
    }
    return out;
}

Eigen::MatrixXd chronological_inverse(const MinimalCholesky& mc) {
    const Eigen::Index n = mc.L.rows();
    const Eigen::Index k = Eigen::Index(mc.active.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = mc.L(mc.active[a], mc.active[b]);

    Eigen::MatrixXd sub_inv = sub.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) out(mc.active[a], mc.active[b]) = sub_inv(a, b);
    return out;
}

BlockLowerCholesky canonical_block_lower(const BlockLowerCholesky& L) {
    const Eigen::Index d = L.d;
    BlockLowerCholesky out = L;
    for (Eigen::Index t = 0; t < L.N; ++t) {
        Eigen::MatrixXd D = L.block(t, t);
        if (D.isZero(0.0)) continue;  // zero block keeps the identity rotation

        // QR of the transpose: D = R^T Q^T, so D Q is lower triangular
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(D.transpose());
        Eigen::MatrixXd Q = qr.householderQ();
        Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < d; ++i)
            if (R(i, i) < 0.0) Q.col(i) = -Q.col(i);

        for (Eigen::Index s = t; s < L.N; ++s) out.set_block(s, t, L.block(s, t) * Q);
        // hard-zero the strict upper triangle of the rotated diagonal block
        Eigen::MatrixXd Dt = out.block(t, t);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i + 1; j < d; ++j) Dt(i, j) = 0.0;
        out.set_block(t, t, Dt);
    }
    return out;
}

}  // namespace aot
