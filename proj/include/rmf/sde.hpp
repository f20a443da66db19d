#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rmf/model.hpp"
#include "rmf/noise.hpp"

namespace rmf {

// Uniform-step path of (x, y) pairs, row k = [x(t_k) | y(t_k)].
struct Trajectory {
    std::size_t n = 0, m = 0;
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> states;  // size() × (n + m)

    std::size_t size() const { return times.size(); }
    std::span<const double> x(std::size_t k) const { return {states.data() + k * (n + m), n}; }
    std::span<const double> y(std::size_t k) const {
        return {states.data() + k * (n + m) + n, m};
    }
};

// Reusable scratch so the stepping functions never allocate.
struct StepScratch {
    std::vector<double> drift_x;
    std::vector<double> drift_y;
    void resize(std::size_t n, std::size_t m) {
        drift_x.resize(n);
        drift_y.resize(m);
    }
};

// x ← x + (A x + f(x, y)) dt + σ₁ dV, with f evaluated at the given y.
// Shared by the full and reduced systems so both produce identical bits
// for identical inputs.
void slow_euler_update(std::span<double> x, std::span<const double> y, const SlowFastModel& model,
                       std::span<const double> dV, double dt, StepScratch& scratch);

// One Euler–Maruyama step of the full system, in place:
//   x' = x + (Ax + f(x,y))dt + σ₁dV
//   y' = y + (1/ε)(By + g(x,y))dt + (σ₂/√ε)dW
// Throws NumericalBlowup (carrying `step_index`) on a non-finite result.
void euler_maruyama_step(std::span<double> x, std::span<double> y, const SlowFastModel& model,
                         std::span<const double> dV, std::span<const double> dW, double dt,
                         StepScratch& scratch, std::size_t step_index = 0);

// Integrates the full system over the main window of `noise`.
// Requires dt_fine ≤ ε/10 (explicit stability of the 1/ε drift).
Trajectory simulate_full_system(const SlowFastModel& model, const NoiseGrid& noise,
                                std::span<const double> x0, std::span<const double> y0);

// Per-coordinate coefficients of the exact transition of
//   dξ = (1/ε) B ξ dt + (σ₂/√ε) dW,  B diagonal negative,
// over a step dt:  ξ' = decay ⊙ ξ + spread ⊙ z,  z ~ N(0, I).
struct OuCoefficients {
    std::vector<double> decay;
    std::vector<double> spread;
    std::vector<double> stationary_sd;  // σ₂ / √(2|B_ii|)
};

// Throws UnsupportedModel when B is not diagonal with negative entries.
OuCoefficients ou_coefficients(const SlowFastModel& model, double dt);

// ξ' = e^{-b dt} ξ + σ₂ √((1 − e^{-2 b dt}) / (2|B_ii|)) · gauss,  b = |B_ii|/ε.
void ou_exact_step(std::span<double> xi, const OuCoefficients& c, std::span<const double> gauss);

// Convenience form that recomputes the coefficients.
std::vector<double> ou_exact_step(std::span<const double> xi, double dt, const SlowFastModel& model,
                                  std::span<const double> gauss);

} // namespace rmf
