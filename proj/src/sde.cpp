#include "rmf/sde.hpp"

#include <cmath>
#include <string>

#include "rmf/errors.hpp"

namespace rmf {

namespace {

bool all_finite(std::span<const double> v) {
    for (double e : v)
        if (!std::isfinite(e)) return false;
    return true;
}

} // namespace

void slow_euler_update(std::span<double> x, std::span<const double> y, const SlowFastModel& model,
                       std::span<const double> dV, double dt, StepScratch& scratch) {
    const std::size_t n = model.n;
    if (scratch.drift_x.size() != n) scratch.drift_x.resize(n);
    auto& fx = scratch.drift_x;
    model.f(x, y, fx);
    for (std::size_t i = 0; i < n; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += model.A[i * n + j] * x[j];
        fx[i] += ax;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += fx[i] * dt + model.sigma1 * dV[i];
}

void euler_maruyama_step(std::span<double> x, std::span<double> y, const SlowFastModel& model,
                         std::span<const double> dV, std::span<const double> dW, double dt,
                         StepScratch& scratch, std::size_t step_index) {
    const std::size_t m = model.m;
    if (scratch.drift_y.size() != m) scratch.drift_y.resize(m);
    auto& gy = scratch.drift_y;
    // g sees the pre-step x, so evaluate it before x moves.
    model.g(x, y, gy);
    for (std::size_t i = 0; i < m; ++i) {
        double by = 0.0;
        for (std::size_t j = 0; j < m; ++j) by += model.B[i * m + j] * y[j];
        gy[i] += by;
    }
    slow_euler_update(x, y, model, dV, dt, scratch);
    const double inv_eps = 1.0 / model.epsilon;
    const double noise = model.sigma2 / std::sqrt(model.epsilon);
    for (std::size_t i = 0; i < m; ++i) y[i] += inv_eps * gy[i] * dt + noise * dW[i];

    if (!all_finite(x) || !all_finite(y))
        throw NumericalBlowup("euler_maruyama_step: non-finite state at step " +
                                  std::to_string(step_index),
                              step_index);
}

Trajectory simulate_full_system(const SlowFastModel& model, const NoiseGrid& noise,
                                std::span<const double> x0, std::span<const double> y0) {
    model.check_shapes();
    if (noise.n != model.n || noise.m != model.m)
        throw ParameterError("simulate_full_system: noise grid dimensions do not match model");
    if (x0.size() != model.n || y0.size() != model.m)
        throw ParameterError("simulate_full_system: initial state has wrong size");
    if (!all_finite(x0) || !all_finite(y0))
        throw ParameterError("simulate_full_system: initial state must be finite");
    const double dt = noise.dt_fine;
    if (dt > model.epsilon / 10.0 * (1.0 + 1e-12))
        throw ParameterError("simulate_full_system: dt_fine = " + std::to_string(dt) +
                             " exceeds epsilon/10 = " + std::to_string(model.epsilon / 10.0));

    const std::size_t n = model.n, m = model.m, w = n + m;
    Trajectory tr;
    tr.n = n;
    tr.m = m;
    tr.t0 = 0.0;
    tr.dt = dt;
    tr.times.resize(noise.n_steps + 1);
    tr.states.resize((noise.n_steps + 1) * w);

    std::vector<double> x(x0.begin(), x0.end()), y(y0.begin(), y0.end());
    StepScratch scratch;
    scratch.resize(n, m);
    auto store = [&](std::size_t k) {
        tr.times[k] = static_cast<double>(k) * dt;
        std::copy(x.begin(), x.end(), tr.states.begin() + static_cast<std::ptrdiff_t>(k * w));
        std::copy(y.begin(), y.end(), tr.states.begin() + static_cast<std::ptrdiff_t>(k * w + n));
    };
    store(0);
    for (std::size_t k = 0; k < noise.n_steps; ++k) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        euler_maruyama_step(x, y, model, noise.dV_at(kk), noise.dW_at(kk), dt, scratch, k);
        store(k + 1);
    }
    return tr;
}

OuCoefficients ou_coefficients(const SlowFastModel& model, double dt) {
    if (!model.B_is_diagonal())
        throw UnsupportedModel("exact OU transition requires a diagonal B");
    OuCoefficients c;
    c.decay.resize(model.m);
    c.spread.resize(model.m);
    c.stationary_sd.resize(model.m);
    for (std::size_t i = 0; i < model.m; ++i) {
        const double b = model.B_diag(i);
        if (!(b < 0.0))
            throw UnsupportedModel("exact OU transition requires negative diagonal entries of B");
        const double rate = -b / model.epsilon;
        c.decay[i] = std::exp(-rate * dt);
        // 1 − e^{−2 rate dt} without cancellation for small steps
        c.spread[i] = model.sigma2 * std::sqrt(-std::expm1(-2.0 * rate * dt) / (2.0 * -b));
        c.stationary_sd[i] = std::abs(model.sigma2) / std::sqrt(2.0 * -b);
    }
    return c;
}

void ou_exact_step(std::span<double> xi, const OuCoefficients& c, std::span<const double> gauss) {
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = c.decay[i] * xi[i] + c.spread[i] * gauss[i];
}

std::vector<double> ou_exact_step(std::span<const double> xi, double dt, const SlowFastModel& model,
                                  std::span<const double> gauss) {
    const auto c = ou_coefficients(model, dt);
    std::vector<double> out(xi.begin(), xi.end());
    ou_exact_step(out, c, gauss);
    return out;
}

} // namespace rmf
