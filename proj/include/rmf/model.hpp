#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rmf {

// out = F(x, y)
using DriftFn = std::function<void(std::span<const double> x, std::span<const double> y,
                                   std::span<double> out)>;

// Slow-fast system
//   dx = (A x + f(x, y)) dt + σ₁ dV
//   dy = (1/ε)(B y + g(x, y)) dt + (σ₂/√ε) dW
// together with the hypothesis constants it is declared to satisfy.
struct SlowFastModel {
    std::size_t n = 1;
    std::size_t m = 1;
    std::vector<double> A;  // n×n row-major
    std::vector<double> B;  // m×m row-major
    double sigma1 = 0.01;
    double sigma2 = 1.0;
    double epsilon = 0.01;

    DriftFn f;    // ℝⁿ×ℝᵐ → ℝⁿ
    DriftFn g;    // ℝⁿ×ℝᵐ → ℝᵐ
    DriftFn g_x;  // → ℝ^{m×n} row-major
    DriftFn g_y;  // → ℝ^{m×m} row-major
    bool g_depends_on_y = true;

    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double L = 0.0;
    double C_f = 0.0;
    double C_g = 0.0;
    double alpha = 0.5;

    bool A_is_diagonal() const;
    bool B_is_diagonal() const;
    double A_diag(std::size_t i) const { return A[i * n + i]; }
    double B_diag(std::size_t i) const { return B[i * m + i]; }

    // Structural checks only (sizes, ε > 0, σ ≠ 0 is *not* enforced so that
    // noiseless test models are representable). Throws ParameterError.
    void check_shapes() const;

    // Bound 2(γ₂−α)/(γ₂−α−L) on the Lipschitz constant of the manifold graph.
    double manifold_lipschitz_bound() const;
};

// Scalar observation function of the signal: dr = h(x, y) dt + dU.
struct ObservationModel {
    std::function<double(std::span<const double> x, std::span<const double> y)> h;
    bool depends_on_y = false;
    double bound = 0.0;      // declared sup |h|; 0 = not declared
    double lipschitz = 0.0;  // declared Lipschitz constant; 0 = not declared
};

// The two-dimensional example
//   ẋ = x + ¼ sin y + 0.01 V̇,   ẏ = −y/ε + cos(x)/(4ε) + Ẇ/√ε
// with γ₁ = γ₂ = 1, L = C_f = C_g = ¼, α = ½.
SlowFastModel example_model(double epsilon = 0.01);

// h(x, y) = arctan(x), |h| ≤ π/2, Lipschitz 1.
ObservationModel arctan_observation();

// h ≡ c.
ObservationModel constant_observation(double c);

// h(x, y) = c·x₀ (unbounded; only used against the Kalman–Bucy oracle).
ObservationModel linear_observation(double c);

// dx = a x dt + σ dV with an inert fast component (B = −1, g = 0, σ₂ = 1).
SlowFastModel linear_gaussian_model(double a, double sigma, double epsilon = 1.0);

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    double observed = 0.0;  // worst observed value of the checked quantity
    double bound = 0.0;     // declared bound it was compared with
    std::size_t probes = 0;
    std::size_t violations = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_passed() const;
    const HypothesisCheck* find(const std::string& name) const;
};

// Probes the declared constants numerically. Never throws for a failed
// hypothesis; failures are reported.
ValidationReport validate_hypotheses(const SlowFastModel& model, std::size_t probe_count,
                                     std::uint64_t rng_seed,
                                     const ObservationModel* observation = nullptr);

} // namespace rmf
