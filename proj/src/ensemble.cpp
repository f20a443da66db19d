#include "rmf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rmf/errors.hpp"

namespace rmf {

ObservationPath generate_observations(const Trajectory& truth, const ObservationModel& h,
                                      std::span<const double> dU) {
    if (truth.size() < 1) throw ParameterError("generate_observations: empty trajectory");
    const std::size_t steps = truth.size() - 1;
    if (dU.size() != steps)
        throw ParameterError("generate_observations: need " + std::to_string(steps) +
                             " observation increments, got " + std::to_string(dU.size()));
    ObservationPath obs;
    obs.dt = truth.dt;
    obs.times = truth.times;
    obs.r.assign(steps + 1, 0.0);
    obs.dr.resize(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        obs.dr[k] = h.h(truth.x(k), truth.y(k)) * truth.dt + dU[k];
        obs.r[k + 1] = obs.r[k] + obs.dr[k];
    }
    return obs;
}

void ParticleEnsemble::fast_state(std::size_t j, std::span<double> out) const {
    const auto yj = y_of(j);
    if (flavor == Flavor::Full) {
        std::copy(yj.begin(), yj.end(), out.begin());
        return;
    }
    const auto xj = xi_of(j);
    for (std::size_t i = 0; i < m; ++i) out[i] = yj[i] + xj[i];
}

std::vector<double> ParticleEnsemble::normalized_weights() const {
    std::vector<double> w(count);
    const double top = count ? *std::max_element(log_w.begin(), log_w.end())
                             : -std::numeric_limits<double>::infinity();
    if (!std::isfinite(top)) throw DegenerateEnsemble("normalized_weights: all weights vanish");
    double total = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        w[j] = std::exp(log_w[j] - top);
        total += w[j];
    }
    for (auto& v : w) v /= total;
    return w;
}

double ParticleEnsemble::log_total_mass() const {
    const double top = *std::max_element(log_w.begin(), log_w.end());
    if (!std::isfinite(top)) return top;
    double total = 0.0;
    for (double l : log_w) total += std::exp(l - top);
    return top + std::log(total);
}

double ParticleEnsemble::effective_sample_size() const {
    const auto w = normalized_weights();
    double s2 = 0.0;
    for (double v : w) s2 += v * v;
    return 1.0 / s2;
}

PriorSampler dirac_prior(std::vector<double> x0, std::vector<double> y0) {
    return [x0 = std::move(x0), y0 = std::move(y0)](GaussianStream&, std::span<double> x,
                                                    std::span<double> y) {
        std::copy(x0.begin(), x0.end(), x.begin());
        std::copy(y0.begin(), y0.end(), y.begin());
    };
}

PriorSampler gaussian_prior(std::vector<double> mean_x, double sd_x, std::vector<double> y0) {
    return [mean_x = std::move(mean_x), sd_x, y0 = std::move(y0)](
               GaussianStream& rng, std::span<double> x, std::span<double> y) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = mean_x[i] + sd_x * rng();
        std::copy(y0.begin(), y0.end(), y.begin());
    };
}

ParticleEnsemble pf_init(std::size_t n_particles, std::size_t n, std::size_t m,
                         const PriorSampler& prior, Flavor flavor, GaussianStream& rng) {
    if (n_particles == 0) throw ParameterError("pf_init: need at least one particle");
    ParticleEnsemble ens;
    ens.flavor = flavor;
    ens.n = n;
    ens.m = m;
    ens.count = n_particles;
    ens.x.assign(n_particles * n, 0.0);
    ens.y.assign(n_particles * m, 0.0);
    if (flavor == Flavor::Reduced) ens.xi.assign(n_particles * m, 0.0);
    ens.log_w.assign(n_particles, 0.0);
    for (std::size_t j = 0; j < n_particles; ++j) prior(rng, ens.x_of(j), ens.y_of(j));
    return ens;
}

void pf_weight_update(ParticleEnsemble& ens, const ObservationModel& h, double dr, double dt) {
    std::vector<double> yfast(ens.m);
    for (std::size_t j = 0; j < ens.count; ++j) {
        ens.fast_state(j, yfast);
        const double hv = h.h(ens.x_of(j), yfast);
        ens.log_w[j] += weight_increment(hv, dr, dt);
    }
}

std::vector<std::size_t> deterministic_resample_indices(std::span<const double> weights,
                                                        std::size_t n_out) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw DegenerateEnsemble("resample: invalid weight");
        total += w;
    }
    if (!(total > 0.0)) throw DegenerateEnsemble("resample: all weights vanish");

    std::vector<std::size_t> idx(n_out);
    const std::size_t last = weights.size() - 1;
    std::size_t j = 0;
    double cum = weights[0] / total;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(n_out);
        while (u >= cum && j < last) {
            ++j;
            cum += weights[j] / total;
        }
        idx[k] = j;
    }
    return idx;
}

void deterministic_resample(ParticleEnsemble& ens) {
    const auto w = ens.normalized_weights();
    const auto idx = deterministic_resample_indices(w, ens.count);
    ens.log_evidence += ens.log_total_mass() - std::log(static_cast<double>(ens.count));

    auto gather = [&](std::vector<double>& v, std::size_t width) {
        if (v.empty() || width == 0) return;
        std::vector<double> out(v.size());
        for (std::size_t k = 0; k < ens.count; ++k)
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(idx[k] * width), width,
                        out.begin() + static_cast<std::ptrdiff_t>(k * width));
        v.swap(out);
    };
    gather(ens.x, ens.n);
    gather(ens.y, ens.m);
    gather(ens.xi, ens.m);
    gather(ens.xi_nodes, ens.nodes_per_particle * ens.m);
    std::fill(ens.log_w.begin(), ens.log_w.end(), 0.0);
}

double estimate(const ParticleEnsemble& ens,
                const std::function<double(std::span<const double>)>& phi) {
    const auto w = ens.normalized_weights();
    double s = 0.0;
    for (std::size_t j = 0; j < ens.count; ++j) s += w[j] * phi(ens.x_of(j));
    return s;
}

} // namespace rmf
