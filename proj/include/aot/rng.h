#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace aot {

// standard 64-bit finalizer; decorrelates structured seed inputs
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(base ^ splitmix64(a ^ splitmix64(b)));
}

inline void fill_standard_normal(Eigen::Ref<Eigen::MatrixXd> M, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = normal(gen);
}

}  // namespace aot
