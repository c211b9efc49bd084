#pragma once

#include <cstdint>
#include <vector>

namespace fedx::convergence {

// Verifies the O(QG log T / sqrt(T)) rate of the regularized server update on
// a noisy strongly convex quadratic, using the prescribed decaying step
// lambda_t = Q / (G sqrt(t)).
struct ConvergenceConfig {
    int dim = 10;
    double G = 1.0;           // gradient bound entering the step size
    double Q = 1.0;           // domain radius entering the step size
    double noise_sigma = 0.1; // stddev of gradient noise
    double eta = 0.05;        // device step forming the proximal anchor
    double gamma = 1e-4;      // proximal weight
    int log2_T_min = 4;
    int log2_T_max = 14;
    int trials = 32;              // independent noise realizations
    bool start_at_optimum = false;
    std::uint64_t seed = 1;
};

struct ConvergencePoint {
    std::int64_t T = 0;
    double mean_gap = 0.0;  // mean of L(theta_T) - L* over trials
};

struct ConvergenceReport {
    std::vector<ConvergencePoint> points;
    // least-squares slope of log(gap) against log(sqrt(T)/log T); the rate
    // holds when it is <= -0.4 (ideal: -1)
    double slope = 0.0;
    double intercept = 0.0;
};

ConvergenceReport run_convergence(const ConvergenceConfig& cfg);

// One trajectory's gap at each checkpoint; exposed for the no-noise and
// start-at-optimum checks.
std::vector<ConvergencePoint> run_trajectory(const ConvergenceConfig& cfg, int trial);

}  // namespace fedx::convergence
