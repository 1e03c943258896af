#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "aot/block_cholesky.h"
#include "aot/couplings.h"
#include "aot/process.h"

namespace aot {

// on-disk JSON shape: {"rows": r, "cols": c, "data": [row-major numbers]}
// with optional "block_N"/"block_d" metadata for block-lower factors and an
// optional "mean" vector of length rows
struct MatrixFile {
    Eigen::MatrixXd matrix;
    std::optional<Eigen::Index> block_N;
    std::optional<Eigen::Index> block_d;
    std::optional<Eigen::VectorXd> mean;
};

std::string to_json_text(const MatrixFile& file);
MatrixFile matrix_file_from_json(const std::string& text);

void save_matrix_file(const MatrixFile& file, const std::string& path);
MatrixFile load_matrix_file(const std::string& path);

MatrixFile to_matrix_file(const Eigen::MatrixXd& matrix);
MatrixFile to_matrix_file(const BlockLowerCholesky& factor);
MatrixFile to_matrix_file(const FilteredGaussianProcess& process);
// stored as the dense block-diagonal matrix with block metadata
MatrixFile to_matrix_file(const BlockCorrelation& correlation);

// each conversion validates the structure the target type requires
BlockLowerCholesky as_block_factor(const MatrixFile& file);
FilteredGaussianProcess as_process(const MatrixFile& file);  // zero mean when absent
BlockCorrelation as_block_correlation(const MatrixFile& file);

}  // namespace aot
