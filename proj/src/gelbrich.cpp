#include "aot/gelbrich.h"

#include <cmath>
#include <limits>
#include <random>

#include "aot/cholesky.h"
#include "aot/errors.h"
#include "aot/metrics.h"

namespace aot {

Eigen::Matrix2d counterexample_covariance(double delta) {
    if (delta <= 0.0) throw InputError("delta must be positive");
    const double s = 2.0 + delta;
    Eigen::Matrix2d B;
    B << 1.0, s, s, s * s + 1.0;
    return B;
}

GelbrichInstance build_counterexample(double delta) {
    if (delta <= 0.0) throw InputError("delta must be positive");
    GelbrichInstance instance;
    instance.delta = delta;
    const double s = 2.0 + delta;
    instance.analytic_gaussian_aw2 = s * s;
    instance.analytic_coupling_cost = s * s - 2.0 * delta;
    const double from_laws =
        aw2_gaussian_laws(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(),
                          Eigen::Vector2d::Zero(), counterexample_covariance(delta));
    if (std::abs(from_laws * from_laws - instance.analytic_gaussian_aw2) >
        1e-10 * (1.0 + instance.analytic_gaussian_aw2))
        throw NumericError("closed form disagrees with the covariance route");
    return instance;
}

CounterexampleSamples sample_counterexample(double delta, Eigen::Index n, std::uint64_t seed) {
    if (delta <= 0.0) throw InputError("delta must be positive");
    if (n < 1) throw InputError("sample count must be at least 1");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CounterexampleSamples out;
    out.x.resize(n, 2);
    out.y.resize(n, 2);
    const double s = 2.0 + delta;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e1 = normal(gen);
        const double e2 = normal(gen);
        const double h = (e1 * e1 - 1.0) * inv_sqrt2;
        out.x(i, 0) = e1;
        out.x(i, 1) = h;
        out.y(i, 0) = h;
        out.y(i, 1) = s * h + e2;
    }
    return out;
}

MonteCarloEstimate monte_carlo_counterexample_cost(double delta, Eigen::Index n,
                                                   std::uint64_t seed) {
    CounterexampleSamples samples = sample_counterexample(delta, n, seed);
    Eigen::VectorXd cost = (samples.x - samples.y).rowwise().squaredNorm();
    MonteCarloEstimate out;
    out.estimate = cost.mean();
    if (n < 2) {
        out.standard_error = std::numeric_limits<double>::infinity();
        return out;
    }
    const double sample_var = (cost.array() - out.estimate).square().sum() / double(n - 1);
    out.standard_error = std::sqrt(sample_var / double(n));
    return out;
}

Eigen::MatrixXd noise_recovery(const Eigen::MatrixXd& X_samples, const Eigen::VectorXd& a,
                               const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw InputError("covariance must be square");
    if (a.size() != A.rows() || X_samples.cols() != A.rows())
        throw InputError("sample dimension does not match the covariance");
    MinimalCholesky mc = minimal_cholesky(A);
    Eigen::MatrixXd inv = chronological_inverse(mc);
    return (X_samples.rowwise() - a.transpose()) * inv.transpose();
}

MdcReport mdc_diagnostic(const Eigen::MatrixXd& noise_samples,
                         const Eigen::MatrixXd& path_samples, Eigen::Index t) {
    const Eigen::Index n = noise_samples.rows();
    if (path_samples.rows() != n) throw InputError("noise and path samples must align row-wise");
    if (noise_samples.cols() != path_samples.cols())
        throw InputError("noise and path samples must have the same width");
    if (t < 0 || t >= noise_samples.cols()) throw InputError("step index out of range");
    const Eigen::Index k = 1 + 2 * t;
    if (n < 10 * k) throw InputError("need at least ten samples per regression feature");

    Eigen::MatrixXd B(n, k);
    B.col(0).setOnes();
    for (Eigen::Index j = 0; j < t; ++j) {
        B.col(1 + j) = path_samples.col(j);
        B.col(1 + t + j) = path_samples.col(j).array().square().matrix();
    }
    Eigen::VectorXd y = noise_samples.col(t);
    Eigen::VectorXd beta = B.completeOrthogonalDecomposition().solve(y);
    Eigen::VectorXd residual = y - B * beta;
    const double ssr = residual.squaredNorm();
    const double sigma2 = ssr / double(n - k);
    Eigen::MatrixXd gram_inv =
        (B.transpose() * B).completeOrthogonalDecomposition().pseudoInverse();

    MdcReport report;
    report.coefficients = beta;
    report.standard_errors =
        (sigma2 * gram_inv.diagonal().array()).max(0.0).sqrt().matrix();
    const double sst = (y.array() - y.mean()).square().sum();
    report.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    return report;
}

}  // namespace aot
