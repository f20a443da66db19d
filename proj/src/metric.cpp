#include "rmf/metric.hpp"

#include <cmath>
#include <string>

#include "rmf/errors.hpp"

namespace rmf {

double metric_family(std::size_t i, double x) {
    if (i == 0) throw ParameterError("metric_family: index is 1-based");
    const double k = static_cast<double>((i + 1) / 2);
    return (i % 2 == 1) ? std::sin(k * x) : std::cos(k * x);
}

namespace {

double integrate(const WeightedMeasure& mu, std::size_t i) {
    double s = 0.0, total = 0.0;
    for (std::size_t j = 0; j < mu.points.size(); ++j) {
        s += mu.weights[j] * metric_family(i, mu.points[j]);
        total += mu.weights[j];
    }
    return s / total;
}

void check(const WeightedMeasure& mu, const char* name) {
    if (mu.points.empty() || mu.points.size() != mu.weights.size())
        throw ParameterError(std::string("prob_metric_d: malformed measure ") + name);
    double total = 0.0;
    for (double w : mu.weights) {
        if (!(w >= 0.0)) throw ParameterError(std::string("prob_metric_d: negative weight in ") + name);
        total += w;
    }
    if (!(total > 0.0)) throw ParameterError(std::string("prob_metric_d: zero mass in ") + name);
}

} // namespace

MetricValue prob_metric_d(const WeightedMeasure& mu, const WeightedMeasure& tau,
                          std::size_t family_size) {
    if (family_size == 0) throw ParameterError("prob_metric_d: family_size must be >= 1");
    check(mu, "mu");
    check(tau, "tau");
    MetricValue out;
    double scale = 1.0;
    for (std::size_t i = 1; i <= family_size; ++i) {
        scale *= 0.5;
        out.value += std::abs(integrate(mu, i) - integrate(tau, i)) * scale;
    }
    out.tail_bound = 2.0 * scale;
    return out;
}

} // namespace rmf
