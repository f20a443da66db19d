#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rmf {

struct NoiseGridSpec {
    std::size_t n = 1;            // slow dimension (V)
    std::size_t m = 1;            // fast dimension (W)
    double t_end = 8.0;           // horizon of the main window [0, t_end]
    double dt_fine = 0.02 / 400;  // Δt / m_sub
    std::size_t future_ext = 0;   // steps past t_end (η needs the future of V)
    std::size_t history_ext = 0;  // steps before 0 (manifold windows look back)
    std::uint64_t seed = 0;
};

// Brownian increments for V, W, U on a uniform grid
//   t_k = t0 + k * dt_fine,  k = 0 .. total_steps()
// with t0 = -history_steps * dt_fine. Increment k covers [t_k, t_{k+1}].
//
// Main and future increments come from one forward stream per process and
// the history from a separate one, so changing the extensions never changes
// the increments on [0, t_end].
struct NoiseGrid {
    double t0 = 0.0;
    double dt_fine = 0.0;
    std::size_t n = 0, m = 0;
    std::size_t history_steps = 0;
    std::size_t n_steps = 0;  // main window
    std::size_t future_extension = 0;
    std::uint64_t seed = 0;

    std::vector<double> dV;  // total_steps × n
    std::vector<double> dW;  // total_steps × m
    std::vector<double> dU;  // total_steps

    std::size_t total_steps() const { return history_steps + n_steps + future_extension; }
    std::size_t origin() const { return history_steps; }
    double t_end() const { return static_cast<double>(n_steps) * dt_fine; }

    // Increments addressed relative to t = 0 (k may be negative).
    std::span<const double> dV_at(std::ptrdiff_t k) const {
        return {dV.data() + index(k) * n, n};
    }
    std::span<const double> dW_at(std::ptrdiff_t k) const {
        return {dW.data() + index(k) * m, m};
    }
    double dU_at(std::ptrdiff_t k) const { return dU[index(k)]; }

private:
    std::size_t index(std::ptrdiff_t k) const {
        return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(history_steps) + k);
    }
};

// Throws ParameterError for a non-positive step or horizon.
NoiseGrid generate_noise_grid(const NoiseGridSpec& spec);

// Number of fine steps covering `span` (rounded to nearest, at least 1).
std::size_t steps_for(double span, double dt);

} // namespace rmf
