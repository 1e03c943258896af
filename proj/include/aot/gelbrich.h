#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace aot {

// the two-step instance whose optimal bicausal cost undercuts the Gaussian
// covariance bound: first marginal has covariance I_2, second has
// counterexample_covariance(delta)
struct GelbrichInstance {
    double delta = 0.0;
    double analytic_gaussian_aw2 = 0.0;   // squared adapted distance of the Gaussian laws
    double analytic_coupling_cost = 0.0;  // expected squared path distance of the explicit coupling
};

Eigen::Matrix2d counterexample_covariance(double delta);

GelbrichInstance build_counterexample(double delta);

// coupled draws from the two non-Gaussian laws that share these covariances
struct CounterexampleSamples {
    Eigen::MatrixXd x;  // rows are paths of the first law
    Eigen::MatrixXd y;  // rows are paths of the second law, coupled to x
};
CounterexampleSamples sample_counterexample(double delta, Eigen::Index n, std::uint64_t seed);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;  // infinite when a single sample is requested
};
MonteCarloEstimate monte_carlo_counterexample_cost(double delta, Eigen::Index n,
                                                   std::uint64_t seed);

// recovers driving noises sample-by-sample through the chronological inverse
// of the minimal factor of A; rows of X_samples are paths
Eigen::MatrixXd noise_recovery(const Eigen::MatrixXd& X_samples, const Eigen::VectorXd& a,
                               const Eigen::MatrixXd& A);

// least-squares fit of noise step t onto an intercept, the path coordinates
// before t, and their squares
struct MdcReport {
    Eigen::VectorXd coefficients;  // intercept, linear terms, squared terms
    Eigen::VectorXd standard_errors;
    double r_squared = 0.0;
};
MdcReport mdc_diagnostic(const Eigen::MatrixXd& noise_samples,
                         const Eigen::MatrixXd& path_samples, Eigen::Index t);

}  // namespace aot
