#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rmf/model.hpp"
#include "rmf/noise.hpp"
#include "rmf/sde.hpp"

namespace rmf {

// Quadrature and truncation for the first-order expansion of the slow
// manifold graph. The rescaled variable s runs over [-s_trunc, 0] with step
// h_quad; node k sits at s_k = -k h_quad.
struct ManifoldConfig {
    double s_trunc = 20.0;
    double h_quad = 0.02;
    int expansion_order = 1;  // 0: H⁰ only, 1: H⁰ + εH¹
    double picard_tol = 1e-8;
    int picard_max_iter = 100;

    // e^{-s_trunc} ≤ picard_tol, 0 < h_quad ≤ 0.1, order ∈ {0, 1}.
    void validate() const;
    std::size_t node_count() const;  // K, nodes are 0..K
};

enum class XiScheme { Exact, Euler };

// Stationary environment processes sampled on the noise grid:
//   eta[i] = η(θ_{t_i} ω₁),  xi[i] = ξᵉ(θ_{t_i} ω₂),  t_i = t0 + i dt
// for i = 0 .. count-1, covering [t0, t_end].
struct EnvironmentPaths {
    std::size_t n = 0, m = 0;
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t origin = 0;  // index of t = 0
    std::size_t count = 0;
    std::vector<double> eta;  // count × n
    std::vector<double> xi;   // count × m

    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    std::span<const double> eta_row(std::size_t i) const { return {eta.data() + i * n, n}; }
    std::span<const double> xi_row(std::size_t i) const { return {xi.data() + i * m, m}; }

    // Linear interpolation in time; throws GridCoverageError outside [t0, t_end].
    void eta_at(double t, std::span<double> out) const;
    void xi_at(double t, std::span<double> out) const;
};

// η(θ_t ω₁)_i = −σ₁ Σ_{k≥0} e^{−A_ii k dt} ΔV_{t + k dt, i}  (left-point rule)
// at every grid time in [t0, t_end]. Requires A diagonal with positive entries
// and at least s_trunc / (min A_ii dt) future steps in the grid.
// Returns (history + n_steps + 1) × n values.
std::vector<double> sample_eta_path(const NoiseGrid& noise, const SlowFastModel& model,
                                    const ManifoldConfig& config);

// ξᵉ at every grid time in [t0, t_end]: stationary draw at t0, then one
// transition per fine step driven by the grid's own dW increments.
std::vector<double> sample_xi_path(const NoiseGrid& noise, const SlowFastModel& model,
                                   XiScheme scheme = XiScheme::Exact);

EnvironmentPaths build_environment(const NoiseGrid& noise, const SlowFastModel& model,
                                   const ManifoldConfig& config,
                                   XiScheme scheme = XiScheme::Exact);

// Environment seen from one time t, on the rescaled quadrature nodes:
//   eta(k) = η(θ_{t + s_k ε} ω₁),  xi(k) = ξᵉ(θ_{t + s_k ε} ω₂).
struct EnvWindow {
    std::size_t n = 0, m = 0, K = 0;
    std::vector<double> eta;  // (K+1) × n
    std::vector<double> xi;   // (K+1) × m

    EnvWindow() = default;
    EnvWindow(std::size_t n_, std::size_t m_, std::size_t K_)
        : n(n_), m(m_), K(K_), eta((K_ + 1) * n_, 0.0), xi((K_ + 1) * m_, 0.0) {}

    std::span<const double> eta_node(std::size_t k) const { return {eta.data() + k * n, n}; }
    std::span<const double> xi_node(std::size_t k) const { return {xi.data() + k * m, m}; }
    std::span<double> eta_node(std::size_t k) { return {eta.data() + k * n, n}; }
    std::span<double> xi_node(std::size_t k) { return {xi.data() + k * m, m}; }
};

// Window at grid index `t_index` (relative to t = 0), sampled by linear
// interpolation at t + s_k ε.
EnvWindow make_window(const EnvironmentPaths& env, std::ptrdiff_t t_index,
                      const SlowFastModel& model, const ManifoldConfig& config);

// Evaluates the expansion Hᵉ ≈ H⁰ + εH¹ of the slow manifold graph.
//
// Both Y₀ and Y₁ are stationary convolutions
//     Y(s) = ∫_{-∞}^{s} e^{B(s−r)} G(r) dr,
// truncated at −s_trunc and discretized with exponential weights that are
// exact for G piecewise linear between nodes. H⁰ = Y₀(0), H¹ = Y₁(0) with
//     G₀(r) = g(x + η_r, Y₀(r) + ξ_r)
//     G₁(r) = g_x(·)[r A x + ∫₀^r f(x + η_u, Y₀(u) + ξ_u) du] + g_y(·) Y₁(r).
// When g depends on y the convolutions are solved by Picard iteration.
class ManifoldSolver {
public:
    struct Workspace {
        std::vector<double> y0, g0, y1, g1, prev, fcum, fval, gx, gy;
        std::vector<double> xarg, yarg, bracket, ax;
    };

    ManifoldSolver(const SlowFastModel& model, const ManifoldConfig& config);

    const ManifoldConfig& config() const { return config_; }
    std::size_t node_count() const { return K_; }

    // Y₀ on the nodes, (K+1) × m, row k at s_k = −k h.
    std::vector<double> solve_Y0(std::span<const double> x, const EnvWindow& w) const;
    // Direct quadrature of ∫_{-S}^{0} e^{-Bs} g(x + η_s, Y₀(s) + ξ_s) ds.
    std::vector<double> compute_H0(std::span<const double> x, const EnvWindow& w,
                                   std::span<const double> Y0) const;
    // First-order coefficient (without the factor ε).
    std::vector<double> compute_H1(std::span<const double> x, const EnvWindow& w,
                                   std::span<const double> Y0) const;

    // out = H⁰ (+ ε H¹ when expansion_order == 1). Allocation-free after the
    // workspace has warmed up.
    void evaluate(std::span<const double> x, const EnvWindow& w, Workspace& ws,
                  std::span<double> out) const;

private:
    void convolve(std::span<const double> G, std::span<double> Y) const;
    void fill_g0(std::span<const double> x, const EnvWindow& w, std::span<const double> Y0,
                 Workspace& ws) const;
    void run_Y0(std::span<const double> x, const EnvWindow& w, Workspace& ws) const;
    void run_Y1(std::span<const double> x, const EnvWindow& w, Workspace& ws) const;
    void prepare(Workspace& ws) const;

    const SlowFastModel* model_;
    ManifoldConfig config_;
    std::size_t K_;
    std::vector<double> decay_;   // e^{B_ii h}
    std::vector<double> w_near_;  // weight of G at the right node s_k
    std::vector<double> w_far_;   // weight of G at the left node s_{k+1}
};

// Free-function forms of the solver operations.
std::vector<double> solve_Y0(std::span<const double> x, const EnvWindow& w,
                             const SlowFastModel& model, const ManifoldConfig& config);
std::vector<double> compute_H0(std::span<const double> x, const EnvWindow& w,
                               const SlowFastModel& model, const ManifoldConfig& config);
std::vector<double> compute_H1(std::span<const double> x, const EnvWindow& w,
                               std::span<const double> Y0, const SlowFastModel& model,
                               const ManifoldConfig& config);
std::vector<double> compute_Heps(std::span<const double> x, const EnvironmentPaths& env,
                                 std::ptrdiff_t t_index, const SlowFastModel& model,
                                 const ManifoldConfig& config);

// Reduced slow system on the manifold, driven by the same dV as the full
// system:
//   x̃' = x̃ + (A x̃ + f(x̃, ỹ)) dt + σ₁ dV,   ỹ = Hᵉ(θ_t ω, x̃ − η_t) + ξ_t.
// The graph value Hᵉ is re-evaluated every `refresh_stride` fine steps
// (1 = every step); ξ_t is always current.
Trajectory simulate_reduced_system(const SlowFastModel& model, const NoiseGrid& noise,
                                   const EnvironmentPaths& env, std::span<const double> x_tilde0,
                                   const ManifoldConfig& config, std::size_t refresh_stride = 1);

struct TrackingReport {
    std::vector<double> times;
    std::vector<double> error;      // |z − z̃|(t)
    std::optional<double> rate;     // fitted decay rate over the transient window
    double window = 0.0;            // length of the fit window
};

// Pointwise Euclidean distance of two trajectories on the same grid, and the
// least-squares slope of log|z − z̃| over [0, window]. Throws ParameterError
// on grid mismatch.
TrackingReport tracking_error(const Trajectory& full, const Trajectory& reduced, double window);

} // namespace rmf
