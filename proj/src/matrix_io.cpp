#include "aot/matrix_io.h"

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aot/errors.h"

namespace aot {

namespace {

using nlohmann::ordered_json;

Eigen::Index get_index(const ordered_json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw InputError(std::string("matrix file needs an integer \"") + key + "\" field");
    const long long v = j.at(key).get<long long>();
    if (v < 1) throw InputError(std::string("\"") + key + "\" must be positive");
    return Eigen::Index(v);
}

std::vector<double> row_major(const Eigen::MatrixXd& M) {
    std::vector<double> data;
    data.reserve(std::size_t(M.size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
    return data;
}

}  // namespace

std::string to_json_text(const MatrixFile& file) {
    ordered_json j;
    j["rows"] = file.matrix.rows();
    j["cols"] = file.matrix.cols();
    j["data"] = row_major(file.matrix);
    if (file.block_N) j["block_N"] = *file.block_N;
    if (file.block_d) j["block_d"] = *file.block_d;
    if (file.mean)
        j["mean"] = std::vector<double>(file.mean->data(), file.mean->data() + file.mean->size());
    return j.dump(2) + "\n";
}

MatrixFile matrix_file_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("matrix file is not valid json: ") + e.what());
    }
    if (!j.is_object()) throw InputError("matrix file must be a json object");

    MatrixFile file;
    const Eigen::Index rows = get_index(j, "rows");
    const Eigen::Index cols = get_index(j, "cols");
    if (!j.contains("data") || !j.at("data").is_array())
        throw InputError("matrix file needs a \"data\" array");
    const auto& data = j.at("data");
    if (Eigen::Index(data.size()) != rows * cols)
        throw InputError("\"data\" length does not equal rows * cols");
    file.matrix.resize(rows, cols);
    Eigen::Index at = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, ++at) {
            const auto& v = data.at(std::size_t(at));
            if (!v.is_number()) throw InputError("\"data\" entries must be numbers");
            file.matrix(r, c) = v.get<double>();
        }

    if (j.contains("block_N") != j.contains("block_d"))
        throw InputError("\"block_N\" and \"block_d\" must appear together");
    if (j.contains("block_N")) {
        const Eigen::Index N = get_index(j, "block_N");
        const Eigen::Index d = get_index(j, "block_d");
        if (rows != cols || rows != N * d)
            throw InputError("block metadata does not match the matrix size");
        BlockLowerCholesky::from_matrix(N, d, file.matrix);
        file.block_N = N;
        file.block_d = d;
    }

    if (j.contains("mean")) {
        const auto& m = j.at("mean");
        if (!m.is_array() || Eigen::Index(m.size()) != rows)
            throw InputError("\"mean\" must be an array of length rows");
        Eigen::VectorXd mean(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto& v = m.at(std::size_t(i));
            if (!v.is_number()) throw InputError("\"mean\" entries must be numbers");
            mean(i) = v.get<double>();
        }
        file.mean = std::move(mean);
    }
    return file;
}

void save_matrix_file(const MatrixFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << to_json_text(file);
    if (!out) throw InputError("write failed: " + path);
}

MatrixFile load_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file for reading: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return matrix_file_from_json(text.str());
}

MatrixFile to_matrix_file(const Eigen::MatrixXd& matrix) {
    MatrixFile file;
    file.matrix = matrix;
    return file;
}

MatrixFile to_matrix_file(const BlockLowerCholesky& factor) {
    MatrixFile file;
    file.matrix = factor.A;
    file.block_N = factor.N;
    file.block_d = factor.d;
    return file;
}

MatrixFile to_matrix_file(const FilteredGaussianProcess& process) {
    MatrixFile file = to_matrix_file(process.factor);
    file.mean = process.mean;
    return file;
}

MatrixFile to_matrix_file(const BlockCorrelation& correlation) {
    if (correlation.blocks.empty()) throw InputError("correlation has no blocks");
    MatrixFile file;
    file.matrix = correlation.dense();
    file.block_N = correlation.steps();
    file.block_d = correlation.blocks.front().rows();
    return file;
}

BlockLowerCholesky as_block_factor(const MatrixFile& file) {
    if (!file.block_N || !file.block_d) throw InputError("matrix file has no block metadata");
    return BlockLowerCholesky::from_matrix(*file.block_N, *file.block_d, file.matrix);
}

FilteredGaussianProcess as_process(const MatrixFile& file) {
    BlockLowerCholesky L = as_block_factor(file);
    if (file.mean) return FilteredGaussianProcess(*file.mean, std::move(L));
    return FilteredGaussianProcess(std::move(L));
}

BlockCorrelation as_block_correlation(const MatrixFile& file) {
    if (!file.block_N || !file.block_d) throw InputError("matrix file has no block metadata");
    const Eigen::Index N = *file.block_N;
    const Eigen::Index d = *file.block_d;
    if (file.matrix.rows() != N * d || file.matrix.cols() != N * d)
        throw InputError("block metadata does not match the matrix size");
    Eigen::MatrixXd off = file.matrix;
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(std::size_t(N));
    for (Eigen::Index t = 0; t < N; ++t) {
        blocks.push_back(file.matrix.block(t * d, t * d, d, d));
        off.block(t * d, t * d, d, d).setZero();
    }
    if (!off.isZero(0.0)) throw InputError("correlation file must be block-diagonal");
    return BlockCorrelation(std::move(blocks));
}

}  // namespace aot
