#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rmf {

struct LinearGaussianProblem {
    double a = -1.0;      // drift dx = a x dt + σ dV
    double sigma = 0.5;
    double c = 1.0;       // observation dr = c x dt + dU
    double mean0 = 0.0;   // prior x₀ ~ N(mean0, var0)
    double var0 = 0.0;
};

struct KalmanSeries {
    std::vector<double> mean;      // posterior mean after k steps, size steps+1
    std::vector<double> variance;
};

// Exact filter for the fine-grid discretization of the scalar linear model,
// with the same conventions as the particle filter: the increment dr[k] is
// explained by the state at the start of step k, after which the state is
// advanced by one Euler step. Converges to the Kalman–Bucy filter as dt → 0.
KalmanSeries kalman_bucy_reference(const LinearGaussianProblem& p, std::span<const double> dr,
                                   double dt);

} // namespace rmf
