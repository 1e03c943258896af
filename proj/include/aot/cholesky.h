#pragma once

#include <vector>

#include <Eigen/Dense>

#include "aot/block_cholesky.h"
#include "aot/errors.h"

namespace aot {

// Lower-triangular factor of a PSD matrix with non-negative diagonal and the
// zero-column property: a zero pivot zeroes its entire column exactly.
struct MinimalCholesky {
    Eigen::MatrixXd L;
    std::vector<Eigen::Index> active;  // indices with L(i,i) > 0, sorted
};

MinimalCholesky minimal_cholesky(const Eigen::MatrixXd& A, double psd_tol = 1e-12);

// E (L_[I,I])^{-1} E^T where E embeds the active coordinates; equals L^{-1}
// when L is invertible, and recovers active noise coordinates in general
Eigen::MatrixXd chronological_inverse(const MinimalCholesky& mc);

// right-rotates each diagonal block to lower-triangular form with non-negative
// diagonal; the result is a fully lower-triangular representative at distance
// zero from the input
BlockLowerCholesky canonical_block_lower(const BlockLowerCholesky& L);

}  // namespace aot
