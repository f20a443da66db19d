#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rmf/filter.hpp"
#include "rmf/manifold.hpp"
#include "rmf/model.hpp"

namespace rmf {

// Everything one experiment needs. Defaults reproduce the two-dimensional
// example: n = 200 particles, m_sub = 400, Δt = 0.02, T = 8,
// x(0) = y(0) = x̃(0) = 1, φ(x) = 10x/(1+x²).
struct ExperimentConfig {
    double epsilon = 0.01;
    double sigma1 = 0.01;
    double sigma2 = 1.0;
    double alpha = 0.5;

    std::size_t n_particles = 200;
    std::size_t m_sub = 400;
    double dt_coarse = 0.02;
    double horizon = 8.0;

    double x0 = 1.0;
    double y0 = 1.0;
    double x_tilde0 = 1.0;

    std::size_t n_replications = 20;
    std::uint64_t master_seed = 42;
    std::size_t jobs = 1;

    ManifoldConfig manifold;  // standalone reduced-system runs (simulate)
    ReducedOptions reduced;   // reduced particle filter
    XiScheme xi_scheme = XiScheme::Exact;

    std::string phi = "rational";
    std::string output_dir = ".";

    double metric_time = 4.0;
    std::size_t metric_terms = 20;
    bool track = true;  // per-replication manifold tracking statistics
    Execution execution = Execution::Parallel;

    double dt_fine() const { return dt_coarse / static_cast<double>(m_sub); }

    // Throws ParameterError: dt_fine ≤ ε/10, n_replications ≥ 1, positive
    // sizes and steps, valid quadrature settings.
    void validate() const;

    SlowFastModel model() const;
};

// Sets one `key = value` entry. Keys are the long CLI flag names without the
// leading dashes (e.g. "particles", "x-tilde0") plus file-only keys such as
// "s-trunc" or "xi-mode". Throws ParameterError for unknown keys or values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// Flat `key = value` file; '#' starts a comment, blank lines are ignored.
void load_config_file(ExperimentConfig& config, const std::string& path);

// Comma-separated list of reals, e.g. "0.01,0.1".
std::vector<double> parse_real_list(const std::string& text);

// Registry: rational (10x/(1+x²)), identity, identity_clipped (x clamped to
// [−10, 10]), sin, indicator:a:b (1 on [a, b)). Acts on the first slow
// coordinate. Throws ParameterError for unknown names.
TestFunction make_test_function(const std::string& name);

} // namespace rmf
