#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rmf/ensemble.hpp"
#include "rmf/kernels.hpp"
#include "rmf/manifold.hpp"
#include "rmf/metric.hpp"
#include "rmf/model.hpp"

namespace rmf {

using TestFunction = std::function<double(std::span<const double>)>;

struct FilterParams {
    std::size_t n_particles = 200;
    std::size_t m_sub = 400;
    double dt_coarse = 0.02;
    double horizon = 8.0;
    std::uint64_t seed = 0;
};

// Reduced-flavor settings. The default quadrature is coarser than the
// standalone ManifoldConfig defaults because Hᵉ is evaluated for every
// particle at every node time.
struct ReducedOptions {
    ManifoldConfig manifold{12.0, 0.1, 1, 1e-5, 100};
    // Fine steps between graph refreshes and between quadrature nodes.
    // 0 = round(h_quad·ε/dt).
    std::size_t refresh_stride = 0;
    XiMode xi_mode = XiMode::PerParticle;
};

enum class Execution { Serial, Parallel };

struct FilterSetup {
    Flavor flavor = Flavor::Full;
    FilterParams params;
    PriorSampler prior;
    TestFunction phi;
    ReducedOptions reduced;
    Execution execution = Execution::Parallel;
    std::vector<std::size_t> snapshot_steps;  // coarse indices (1-based times c·Δt)
};

struct FilterSnapshot {
    std::size_t coarse_index = 0;
    double time = 0.0;
    WeightedMeasure measure;  // first slow coordinate, normalized weights
};

// One record per coarse time t_c = c·Δt, c = 1..T/Δt, taken after the
// m_sub sub-steps and before resampling.
struct FilterSeries {
    Flavor flavor = Flavor::Full;
    std::vector<double> times;
    std::vector<double> estimates;       // π_t(φ)
    std::vector<double> phi_variance;    // weighted variance of φ
    std::vector<double> ess;             // effective sample size
    std::vector<double> log_normalizer;  // log ρ̂_t(1)
    std::vector<FilterSnapshot> snapshots;
};

// Particle filter on a shared observation path. Full flavor propagates (x, y)
// with Euler–Maruyama; reduced flavor propagates x̃ on the slow manifold.
// Particle j uses streams (seed, j) in both flavors, so with identical seeds
// the two filters see the same V and W increments.
FilterSeries run_filter(const SlowFastModel& model, const ObservationModel& h,
                        const ObservationPath& obs, const FilterSetup& setup);

// Builds the reduced-flavor context for a filter run of the given length.
ReducedContext make_reduced_context(const SlowFastModel& model, const ReducedOptions& options,
                                    double dt, std::size_t n_steps, std::uint64_t seed);

} // namespace rmf
