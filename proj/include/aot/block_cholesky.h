#pragma once

#include <Eigen/Dense>

#include "aot/errors.h"

namespace aot {

// Nd x Nd matrix with d x d blocks, zero strictly above the block diagonal.
// Diagonal blocks are arbitrary square matrices, not necessarily triangular.
struct BlockLowerCholesky {
    Eigen::Index N = 0;
    Eigen::Index d = 0;
    Eigen::MatrixXd A;  // the full Nd x Nd matrix

    BlockLowerCholesky() = default;
    BlockLowerCholesky(Eigen::Index steps, Eigen::Index dim)
        : N(steps), d(dim), A(Eigen::MatrixXd::Zero(steps * dim, steps * dim)) {
        if (steps < 1 || dim < 1) throw InputError("block factor needs N >= 1 and d >= 1");
    }

    // validates the strict upper blocks are exactly zero
    static BlockLowerCholesky from_matrix(Eigen::Index steps, Eigen::Index dim,
                                          const Eigen::MatrixXd& M);

    Eigen::Index size() const { return N * d; }

    Eigen::Block<const Eigen::MatrixXd> block(Eigen::Index s, Eigen::Index t) const {
        return A.block(s * d, t * d, d, d);
    }
    void set_block(Eigen::Index s, Eigen::Index t, const Eigen::MatrixXd& B) {
        if (t > s) throw InputError("cannot write a block above the block diagonal");
        A.block(s * d, t * d, d, d) = B;
    }

    // rows t..N-1 of column block t: the part that can be nonzero
    Eigen::Block<const Eigen::MatrixXd> column_tail(Eigen::Index t) const {
        return A.block(t * d, t * d, (N - t) * d, d);
    }

    double frob_squared() const { return A.squaredNorm(); }

    // diagonal block of L^T M restricted to step t, computed from column tails
    static Eigen::MatrixXd cross_diag_block(const BlockLowerCholesky& L,
                                            const BlockLowerCholesky& M, Eigen::Index t) {
        return L.column_tail(t).transpose() * M.column_tail(t);
    }
};

inline void require_same_shape(const BlockLowerCholesky& L, const BlockLowerCholesky& M) {
    if (L.N != M.N || L.d != M.d) throw InputError("factors have mismatched block dimensions");
}

}  // namespace aot
