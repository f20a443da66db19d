#pragma once

#include <cstddef>
#include <vector>

namespace rmf {

// Weighted empirical probability measure on ℝ. Weights need not be
// normalized.
struct WeightedMeasure {
    std::vector<double> points;
    std::vector<double> weights;
};

struct MetricValue {
    double value = 0.0;       // truncated sum
    double tail_bound = 0.0;  // bound on the omitted terms
};

// i-th member (1-based) of the test family used by the metric:
//   φ_{2k−1}(x) = sin(kx),  φ_{2k}(x) = cos(kx),  k = 1, 2, ...
// Every member satisfies sup|φ_i| ≤ 1.
double metric_family(std::size_t i, double x);

// d(μ, τ) ≈ Σ_{i=1}^{N} |∫φ_i dμ − ∫φ_i dτ| / 2^i, tail ≤ 2·2^{−N}.
MetricValue prob_metric_d(const WeightedMeasure& mu, const WeightedMeasure& tau,
                          std::size_t family_size = 20);

} // namespace rmf
