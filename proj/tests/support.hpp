#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "rmf/manifold.hpp"
#include "rmf/model.hpp"
#include "rmf/noise.hpp"

namespace testing {

// Example model with both noise intensities switched off (η ≡ 0, ξ ≡ 0).
inline rmf::SlowFastModel frozen_example(double eps) {
    auto m = rmf::example_model(eps);
    m.sigma1 = 0.0;
    m.sigma2 = 0.0;
    return m;
}

inline rmf::SlowFastModel constant_g_model(double c) {
    auto m = rmf::example_model(0.01);
    m.g = [c](std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = c; };
    m.g_x = [](std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    return m;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double mu = mean(v);
    double s = 0.0;
    for (double e : v) s += (e - mu) * (e - mu);
    return s / static_cast<double>(v.size() - 1);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rmf_test_" + name);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testing
