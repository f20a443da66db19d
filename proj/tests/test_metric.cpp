#include "doctest.h"

#include <cmath>

#include "rmf/errors.hpp"
#include "rmf/metric.hpp"

using namespace rmf;

namespace {

double reference_distance(const WeightedMeasure& a, const WeightedMeasure& b, std::size_t N) {
    auto integral = [](const WeightedMeasure& m, std::size_t i) {
        const double k = static_cast<double>((i + 1) / 2);
        double s = 0.0, t = 0.0;
        for (std::size_t j = 0; j < m.points.size(); ++j) {
            s += m.weights[j] * (i % 2 ? std::sin(k * m.points[j]) : std::cos(k * m.points[j]));
            t += m.weights[j];
        }
        return s / t;
    };
    double d = 0.0;
    for (std::size_t i = 1; i <= N; ++i)
        d += std::abs(integral(a, i) - integral(b, i)) / std::pow(2.0, static_cast<double>(i));
    return d;
}

} // namespace

TEST_CASE("test family members") {
    CHECK(metric_family(1, 0.3) == std::sin(0.3));
    CHECK(metric_family(2, 0.3) == std::cos(0.3));
    CHECK(metric_family(5, 0.3) == std::sin(3 * 0.3));
    CHECK_THROWS_AS(metric_family(0, 0.0), ParameterError);
    for (std::size_t i = 1; i <= 40; ++i)
        for (double x = -10; x <= 10; x += 0.37) REQUIRE(std::abs(metric_family(i, x)) <= 1.0);
}

TEST_CASE("three-point measures") {
    const WeightedMeasure mu{{-1.0, 0.0, 2.0}, {0.2, 0.5, 0.3}};
    const WeightedMeasure tau{{-1.0, 0.5, 2.0}, {1.0, 1.0, 2.0}};
    const WeightedMeasure nu{{3.0, 0.1, -0.4}, {0.1, 0.1, 0.8}};

    const auto self = prob_metric_d(mu, mu);
    CHECK(self.value == 0.0);
    CHECK(self.tail_bound == doctest::Approx(2.0 * std::pow(2.0, -20.0)));

    const double d = prob_metric_d(mu, tau).value;
    CHECK(d == doctest::Approx(reference_distance(mu, tau, 20)).epsilon(1e-12));
    CHECK(d == prob_metric_d(tau, mu).value);
    CHECK(d > 0.0);
    CHECK(d <= 2.0);
    CHECK(d <= prob_metric_d(mu, nu).value + prob_metric_d(nu, tau).value + 1e-15);

    // unnormalized weights describe the same measure
    const WeightedMeasure scaled{{-1.0, 0.0, 2.0}, {2.0, 5.0, 3.0}};
    CHECK(prob_metric_d(mu, scaled).value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("truncation bound covers the omitted terms") {
    const WeightedMeasure a{{0.0}, {1.0}}, b{{3.1}, {1.0}};
    const auto short_sum = prob_metric_d(a, b, 6);
    const auto long_sum = prob_metric_d(a, b, 40);
    CHECK(long_sum.value - short_sum.value <= short_sum.tail_bound);
}

TEST_CASE("malformed measures") {
    const WeightedMeasure ok{{0.0}, {1.0}};
    CHECK_THROWS_AS(prob_metric_d(ok, WeightedMeasure{}), ParameterError);
    CHECK_THROWS_AS(prob_metric_d(ok, WeightedMeasure{{0.0}, {0.0}}), ParameterError);
    CHECK_THROWS_AS(prob_metric_d(ok, WeightedMeasure{{0.0}, {-1.0}}), ParameterError);
}
