#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rmf/model.hpp"
#include "rmf/random.hpp"
#include "rmf/sde.hpp"

namespace rmf {

// r_t = U_t + ∫₀ᵗ h(x_s, y_s) ds on the truth's grid.
struct ObservationPath {
    double dt = 0.0;
    std::vector<double> times;  // n_steps + 1
    std::vector<double> r;      // r[0] = 0
    std::vector<double> dr;     // n_steps, dr[k] = r[k+1] − r[k]
};

// dr[k] = h(x_k, y_k) dt + dU[k]. `dU` must hold one increment per step of
// `truth`; throws ParameterError otherwise.
ObservationPath generate_observations(const Trajectory& truth, const ObservationModel& h,
                                      std::span<const double> dU);

enum class Flavor { Full, Reduced };

// Weighted particle cloud, struct-of-arrays. Weights are kept as logs so long
// horizons cannot overflow; a_j = exp(log_w[j]).
//
// Full flavor:    x (count×n), y (count×m) is the fast state.
// Reduced flavor: x is x̃, y holds the current manifold value Hᵉ, xi is the
//                 particle's own ξᵉ and xi_nodes its ring of past ξᵉ samples.
struct ParticleEnsemble {
    Flavor flavor = Flavor::Full;
    std::size_t n = 0, m = 0, count = 0;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> xi;
    std::vector<double> xi_nodes;
    std::size_t nodes_per_particle = 0;  // ring length (K+1)
    std::size_t ring_head = 0;           // slot holding the newest node
    std::vector<double> log_w;

    // log ρ̂_t(1): running log of the mean un-normalized mass, carried across
    // resampling so it stays an estimate of the observation likelihood.
    double log_evidence = 0.0;

    std::span<double> x_of(std::size_t j) { return {x.data() + j * n, n}; }
    std::span<const double> x_of(std::size_t j) const { return {x.data() + j * n, n}; }
    std::span<double> y_of(std::size_t j) { return {y.data() + j * m, m}; }
    std::span<const double> y_of(std::size_t j) const { return {y.data() + j * m, m}; }
    std::span<double> xi_of(std::size_t j) { return {xi.data() + j * m, m}; }
    std::span<const double> xi_of(std::size_t j) const { return {xi.data() + j * m, m}; }

    // ξ sampled `back` nodes before the newest one.
    std::span<const double> xi_node(std::size_t j, std::size_t back) const {
        const std::size_t slot = (ring_head + nodes_per_particle - back) % nodes_per_particle;
        return {xi_nodes.data() + (j * nodes_per_particle + slot) * m, m};
    }

    // ỹ for the reduced flavor (H + ξ), y for the full flavor.
    void fast_state(std::size_t j, std::span<double> out) const;

    // Normalized weights (max-subtracted before exponentiation).
    std::vector<double> normalized_weights() const;
    // log Σ_j a_j
    double log_total_mass() const;
    // (Σa)² / Σa²
    double effective_sample_size() const;
};

// Draws one state into (x, y).
using PriorSampler =
    std::function<void(GaussianStream& rng, std::span<double> x, std::span<double> y)>;

PriorSampler dirac_prior(std::vector<double> x0, std::vector<double> y0);
PriorSampler gaussian_prior(std::vector<double> mean_x, double sd_x, std::vector<double> y0);

// n_particles i.i.d. draws from the prior, all weights 1 (log 0).
ParticleEnsemble pf_init(std::size_t n_particles, std::size_t n, std::size_t m,
                         const PriorSampler& prior, Flavor flavor, GaussianStream& rng);

// Per particle: b_j = h_j dr − (dt/2)|h_j|², a_j ← a_j e^{b_j}, with h_j
// evaluated at the particle's current (pre-step) state. For the reduced
// flavor h is evaluated at (x̃, Hᵉ + ξᵉ).
void pf_weight_update(ParticleEnsemble& ens, const ObservationModel& h, double dr, double dt);

// log-weight increment b for one particle with observation value hv.
inline double weight_increment(double hv, double dr, double dt) {
    return hv * dr - 0.5 * dt * hv * hv;
}

// Kitagawa deterministic resampling indices: with normalized cumulative
// weights c_j, output k ∈ [0, n_out) copies particle j where
// c_{j−1} ≤ (k + ½)/n_out < c_j. Throws DegenerateEnsemble if all weights
// vanish.
std::vector<std::size_t> deterministic_resample_indices(std::span<const double> weights,
                                                        std::size_t n_out);

// Resamples in place (count unchanged), resets all weights to 1 and folds the
// pre-reset mean mass into log_evidence.
void deterministic_resample(ParticleEnsemble& ens);

// Σ a_j φ(x_j) / Σ a_j.
double estimate(const ParticleEnsemble& ens,
                const std::function<double(std::span<const double>)>& phi);

} // namespace rmf
