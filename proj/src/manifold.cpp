#include "rmf/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rmf/errors.hpp"
#include "rmf/random.hpp"

namespace rmf {

// ---------------------------------------------------------------------------
// configuration

void ManifoldConfig::validate() const {
    if (!(h_quad > 0.0) || h_quad > 0.1 + 1e-12)
        throw ParameterError("manifold config: h_quad must lie in (0, 0.1], got " +
                             std::to_string(h_quad));
    if (!(s_trunc > 0.0)) throw ParameterError("manifold config: s_trunc must be positive");
    if (!(picard_tol > 0.0)) throw ParameterError("manifold config: picard_tol must be positive");
    if (std::exp(-s_trunc) > picard_tol * (1.0 + 1e-9))
        throw ParameterError("manifold config: e^{-s_trunc} = " + std::to_string(std::exp(-s_trunc)) +
                             " exceeds picard_tol = " + std::to_string(picard_tol));
    if (expansion_order != 0 && expansion_order != 1)
        throw ParameterError("manifold config: expansion_order must be 0 or 1");
    if (picard_max_iter < 1) throw ParameterError("manifold config: picard_max_iter must be >= 1");
}

std::size_t ManifoldConfig::node_count() const {
    return static_cast<std::size_t>(std::llround(std::ceil(s_trunc / h_quad - 1e-9)));
}

// ---------------------------------------------------------------------------
// environment paths

namespace {

void interpolate(const std::vector<double>& values, std::size_t width, std::size_t count,
                 double t0, double dt, double t, std::span<double> out, const char* what) {
    const double p = (t - t0) / dt;
    const double last = static_cast<double>(count - 1);
    if (p < -1e-7 || p > last + 1e-7)
        throw GridCoverageError(std::string(what) + ": time " + std::to_string(t) +
                                " outside the sampled environment");
    const double pc = std::clamp(p, 0.0, last);
    auto i = static_cast<std::size_t>(std::floor(pc));
    if (i >= count - 1) i = count - 1;
    const double frac = pc - static_cast<double>(i);
    if (frac < 1e-9 || i + 1 >= count) {
        for (std::size_t c = 0; c < width; ++c) out[c] = values[i * width + c];
        return;
    }
    for (std::size_t c = 0; c < width; ++c)
        out[c] = (1.0 - frac) * values[i * width + c] + frac * values[(i + 1) * width + c];
}

} // namespace

void EnvironmentPaths::eta_at(double t, std::span<double> out) const {
    interpolate(eta, n, count, t0, dt, t, out, "eta_at");
}

void EnvironmentPaths::xi_at(double t, std::span<double> out) const {
    interpolate(xi, m, count, t0, dt, t, out, "xi_at");
}

std::vector<double> sample_eta_path(const NoiseGrid& noise, const SlowFastModel& model,
                                    const ManifoldConfig& config) {
    if (!model.A_is_diagonal())
        throw UnsupportedModel("sample_eta_path: A must be diagonal");
    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.n; ++i) {
        if (!(model.A_diag(i) > 0.0))
            throw UnsupportedModel("sample_eta_path: A must have positive diagonal entries");
        min_rate = std::min(min_rate, model.A_diag(i));
    }
    const double dt = noise.dt_fine;
    const auto needed =
        static_cast<std::size_t>(std::ceil(config.s_trunc / (min_rate * dt) - 1e-6));
    if (noise.future_extension < needed)
        throw GridCoverageError("sample_eta_path: future extension of " +
                                std::to_string(noise.future_extension) + " steps, need " +
                                std::to_string(needed));

    const std::size_t n = model.n;
    const std::size_t total = noise.total_steps();
    const std::size_t keep = noise.history_steps + noise.n_steps + 1;
    std::vector<double> decay(n);
    for (std::size_t i = 0; i < n; ++i) decay[i] = std::exp(-model.A_diag(i) * dt);

    // η_t = −σ₁ ΔV_t + e^{−A dt} η_{t+dt}, started from 0 past the last increment.
    std::vector<double> eta(keep * n, 0.0);
    std::vector<double> cur(n, 0.0);
    for (std::size_t idx = total; idx-- > 0;) {
        for (std::size_t i = 0; i < n; ++i)
            cur[i] = decay[i] * cur[i] - model.sigma1 * noise.dV[idx * n + i];
        if (idx < keep)
            std::copy(cur.begin(), cur.end(), eta.begin() + static_cast<std::ptrdiff_t>(idx * n));
    }
    return eta;
}

std::vector<double> sample_xi_path(const NoiseGrid& noise, const SlowFastModel& model,
                                   XiScheme scheme) {
    const std::size_t m = model.m;
    const std::size_t keep = noise.history_steps + noise.n_steps + 1;
    const double dt = noise.dt_fine;
    std::vector<double> xi(keep * m, 0.0);
    std::vector<double> cur(m, 0.0), z(m);

    const bool diagonal_stable = [&] {
        if (!model.B_is_diagonal()) return false;
        for (std::size_t i = 0; i < m; ++i)
            if (!(model.B_diag(i) < 0.0)) return false;
        return true;
    }();
    if (scheme == XiScheme::Exact && !diagonal_stable)
        throw UnsupportedModel("sample_xi_path: exact scheme requires diagonal negative B");

    if (diagonal_stable) {
        GaussianStream rng(derive_seed(noise.seed, {stream::kXiStationary}));
        for (std::size_t i = 0; i < m; ++i)
            cur[i] = std::abs(model.sigma2) / std::sqrt(-2.0 * model.B_diag(i)) * rng();
    }
    std::copy(cur.begin(), cur.end(), xi.begin());

    if (scheme == XiScheme::Exact) {
        const auto c = ou_coefficients(model, dt);
        const double inv_sd = 1.0 / std::sqrt(dt);
        for (std::size_t idx = 0; idx + 1 < keep; ++idx) {
            for (std::size_t i = 0; i < m; ++i) z[i] = noise.dW[idx * m + i] * inv_sd;
            ou_exact_step(cur, c, z);
            std::copy(cur.begin(), cur.end(), xi.begin() + static_cast<std::ptrdiff_t>((idx + 1) * m));
        }
    } else {
        const double inv_eps = 1.0 / model.epsilon;
        const double noise_scale = model.sigma2 / std::sqrt(model.epsilon);
        std::vector<double> bx(m);
        for (std::size_t idx = 0; idx + 1 < keep; ++idx) {
            for (std::size_t i = 0; i < m; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j) s += model.B[i * m + j] * cur[j];
                bx[i] = s;
            }
            for (std::size_t i = 0; i < m; ++i)
                cur[i] += inv_eps * bx[i] * dt + noise_scale * noise.dW[idx * m + i];
            std::copy(cur.begin(), cur.end(), xi.begin() + static_cast<std::ptrdiff_t>((idx + 1) * m));
        }
    }
    return xi;
}

EnvironmentPaths build_environment(const NoiseGrid& noise, const SlowFastModel& model,
                                   const ManifoldConfig& config, XiScheme scheme) {
    EnvironmentPaths env;
    env.n = model.n;
    env.m = model.m;
    env.t0 = noise.t0;
    env.dt = noise.dt_fine;
    env.origin = noise.history_steps;
    env.count = noise.history_steps + noise.n_steps + 1;
    env.eta = sample_eta_path(noise, model, config);
    env.xi = sample_xi_path(noise, model, scheme);
    return env;
}

EnvWindow make_window(const EnvironmentPaths& env, std::ptrdiff_t t_index,
                      const SlowFastModel& model, const ManifoldConfig& config) {
    const std::size_t K = config.node_count();
    EnvWindow w(env.n, env.m, K);
    const double t = static_cast<double>(t_index) * env.dt;
    for (std::size_t k = 0; k <= K; ++k) {
        const double tk = t - static_cast<double>(k) * config.h_quad * model.epsilon;
        env.eta_at(tk, w.eta_node(k));
        env.xi_at(tk, w.xi_node(k));
    }
    return w;
}

// ---------------------------------------------------------------------------
// solver

namespace {

// (z e^z − e^z + 1)/z²
double phi1(double z) {
    if (std::abs(z) < 1e-2) return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0 + z * z * z * z / 144.0;
    return (z * std::exp(z) - std::expm1(z)) / (z * z);
}

// (e^z − 1)/z
double phi0(double z) {
    if (z == 0.0) return 1.0;
    return std::expm1(z) / z;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

ManifoldSolver::ManifoldSolver(const SlowFastModel& model, const ManifoldConfig& config)
    : model_(&model), config_(config) {
    config_.validate();
    model.check_shapes();
    if (!model.B_is_diagonal())
        throw UnsupportedModel("manifold solver: B must be diagonal");
    if (config_.expansion_order == 1 && !model.g_x)
        throw ParameterError("manifold solver: first-order expansion needs g_x");
    if (config_.expansion_order == 1 && model.g_depends_on_y && !model.g_y)
        throw ParameterError("manifold solver: first-order expansion needs g_y");
    K_ = config_.node_count();
    const std::size_t m = model.m;
    const double h = config_.h_quad;
    decay_.resize(m);
    w_near_.resize(m);
    w_far_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double b = model.B_diag(i);
        if (!(b < 0.0)) throw UnsupportedModel("manifold solver: B must be negative definite");
        const double z = b * h;
        decay_[i] = std::exp(z);
        w_far_[i] = h * phi1(z);
        w_near_[i] = h * phi0(z) - w_far_[i];
    }
}

void ManifoldSolver::prepare(Workspace& ws) const {
    const std::size_t n = model_->n, m = model_->m, N = K_ + 1;
    ws.y0.resize(N * m);
    ws.g0.resize(N * m);
    ws.y1.resize(N * m);
    ws.g1.resize(N * m);
    ws.prev.resize(N * m);
    ws.fcum.resize(N * n);
    ws.fval.resize(N * n);
    ws.gx.resize(N * m * n);
    if (model_->g_depends_on_y) ws.gy.resize(N * m * m);
    ws.xarg.resize(n);
    ws.yarg.resize(m);
    ws.bracket.resize(n);
    ws.ax.resize(n);
}

void ManifoldSolver::convolve(std::span<const double> G, std::span<double> Y) const {
    const std::size_t m = model_->m;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = decay_[i], wn = w_near_[i], wf = w_far_[i];
        const double* g = G.data() + i;
        double* y = Y.data() + i;
        double acc = 0.0;
        y[K_ * m] = 0.0;
        for (std::size_t k = K_; k-- > 0;) {
            acc = e * acc + wn * g[k * m] + wf * g[(k + 1) * m];
            y[k * m] = acc;
        }
    }
}

void ManifoldSolver::fill_g0(std::span<const double> x, const EnvWindow& w,
                             std::span<const double> Y0, Workspace& ws) const {
    const std::size_t n = model_->n, m = model_->m;
    for (std::size_t k = 0; k <= K_; ++k) {
        const auto eta = w.eta_node(k);
        const auto xi = w.xi_node(k);
        for (std::size_t i = 0; i < n; ++i) ws.xarg[i] = x[i] + eta[i];
        for (std::size_t i = 0; i < m; ++i) ws.yarg[i] = Y0[k * m + i] + xi[i];
        model_->g(ws.xarg, ws.yarg, std::span<double>(ws.g0.data() + k * m, m));
    }
}

void ManifoldSolver::run_Y0(std::span<const double> x, const EnvWindow& w, Workspace& ws) const {
    std::fill(ws.y0.begin(), ws.y0.end(), 0.0);
    fill_g0(x, w, ws.y0, ws);
    convolve(ws.g0, ws.y0);
    if (!model_->g_depends_on_y) return;

    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < config_.picard_max_iter; ++it) {
        std::copy(ws.y0.begin(), ws.y0.end(), ws.prev.begin());
        fill_g0(x, w, ws.prev, ws);
        convolve(ws.g0, ws.y0);
        residual = max_abs_diff(ws.y0, ws.prev);
        if (residual <= config_.picard_tol) {
            // leave g0 consistent with the converged Y₀
            fill_g0(x, w, ws.y0, ws);
            return;
        }
    }
    throw ConvergenceError("solve_Y0: Picard iteration did not converge, residual " +
                               std::to_string(residual),
                           residual);
}

void ManifoldSolver::run_Y1(std::span<const double> x, const EnvWindow& w, Workspace& ws) const {
    const std::size_t n = model_->n, m = model_->m;
    const double h = config_.h_quad;
    const auto& A = model_->A;

    // f, g_x (and g_y) along (x + η_r, Y₀(r) + ξ_r)
    for (std::size_t k = 0; k <= K_; ++k) {
        const auto eta = w.eta_node(k);
        const auto xi = w.xi_node(k);
        for (std::size_t i = 0; i < n; ++i) ws.xarg[i] = x[i] + eta[i];
        for (std::size_t i = 0; i < m; ++i) ws.yarg[i] = ws.y0[k * m + i] + xi[i];
        model_->f(ws.xarg, ws.yarg, std::span<double>(ws.fval.data() + k * n, n));
        model_->g_x(ws.xarg, ws.yarg, std::span<double>(ws.gx.data() + k * m * n, m * n));
        if (model_->g_depends_on_y)
            model_->g_y(ws.xarg, ws.yarg, std::span<double>(ws.gy.data() + k * m * m, m * m));
    }

    // ∫₀^{s_k} f dr, trapezoidal, s_k ≤ 0
    for (std::size_t i = 0; i < n; ++i) ws.fcum[i] = 0.0;
    for (std::size_t k = 0; k < K_; ++k)
        for (std::size_t i = 0; i < n; ++i)
            ws.fcum[(k + 1) * n + i] =
                ws.fcum[k * n + i] - 0.5 * h * (ws.fval[k * n + i] + ws.fval[(k + 1) * n + i]);

    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += A[i * n + j] * x[j];
        ws.ax[i] = acc;
    }
    // base_k = g_x(k) · [s_k A x + F_k], stored in g1
    for (std::size_t k = 0; k <= K_; ++k) {
        const double s = -static_cast<double>(k) * h;
        for (std::size_t i = 0; i < n; ++i) ws.bracket[i] = s * ws.ax[i] + ws.fcum[k * n + i];
        for (std::size_t r = 0; r < m; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) acc += ws.gx[k * m * n + r * n + c] * ws.bracket[c];
            ws.g1[k * m + r] = acc;
        }
    }

    if (!model_->g_depends_on_y) {
        convolve(ws.g1, ws.y1);
        return;
    }

    // Y₁ = conv(base + g_y Y₁), Picard on the linear term.
    std::vector<double>& base = ws.prev;
    std::copy(ws.g1.begin(), ws.g1.end(), base.begin());
    std::fill(ws.y1.begin(), ws.y1.end(), 0.0);
    std::vector<double> last(ws.y1.size());
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < config_.picard_max_iter; ++it) {
        std::copy(ws.y1.begin(), ws.y1.end(), last.begin());
        for (std::size_t k = 0; k <= K_; ++k)
            for (std::size_t r = 0; r < m; ++r) {
                double acc = base[k * m + r];
                for (std::size_t c = 0; c < m; ++c)
                    acc += ws.gy[k * m * m + r * m + c] * last[k * m + c];
                ws.g1[k * m + r] = acc;
            }
        convolve(ws.g1, ws.y1);
        residual = max_abs_diff(ws.y1, last);
        if (residual <= config_.picard_tol) return;
    }
    throw ConvergenceError("compute_H1: Picard iteration did not converge, residual " +
                               std::to_string(residual),
                           residual);
}

std::vector<double> ManifoldSolver::solve_Y0(std::span<const double> x, const EnvWindow& w) const {
    Workspace ws;
    prepare(ws);
    run_Y0(x, w, ws);
    return ws.y0;
}

std::vector<double> ManifoldSolver::compute_H0(std::span<const double> x, const EnvWindow& w,
                                               std::span<const double> Y0) const {
    const std::size_t m = model_->m;
    Workspace ws;
    prepare(ws);
    fill_g0(x, w, Y0, ws);
    std::vector<double> H(m, 0.0), kernel(m, 1.0);
    for (std::size_t k = 0; k < K_; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            H[i] += kernel[i] * (w_near_[i] * ws.g0[k * m + i] + w_far_[i] * ws.g0[(k + 1) * m + i]);
            kernel[i] *= decay_[i];
        }
    }
    return H;
}

std::vector<double> ManifoldSolver::compute_H1(std::span<const double> x, const EnvWindow& w,
                                               std::span<const double> Y0) const {
    const std::size_t m = model_->m;
    Workspace ws;
    prepare(ws);
    std::copy(Y0.begin(), Y0.end(), ws.y0.begin());
    run_Y1(x, w, ws);
    return {ws.y1.begin(), ws.y1.begin() + static_cast<std::ptrdiff_t>(m)};
}

void ManifoldSolver::evaluate(std::span<const double> x, const EnvWindow& w, Workspace& ws,
                              std::span<double> out) const {
    if (ws.y0.size() != (K_ + 1) * model_->m) prepare(ws);
    const std::size_t m = model_->m;
    run_Y0(x, w, ws);
    for (std::size_t i = 0; i < m; ++i) out[i] = ws.y0[i];
    if (config_.expansion_order == 0) return;
    run_Y1(x, w, ws);
    for (std::size_t i = 0; i < m; ++i) out[i] += model_->epsilon * ws.y1[i];
}

std::vector<double> solve_Y0(std::span<const double> x, const EnvWindow& w,
                             const SlowFastModel& model, const ManifoldConfig& config) {
    return ManifoldSolver(model, config).solve_Y0(x, w);
}

std::vector<double> compute_H0(std::span<const double> x, const EnvWindow& w,
                               const SlowFastModel& model, const ManifoldConfig& config) {
    ManifoldSolver solver(model, config);
    const auto Y0 = solver.solve_Y0(x, w);
    return solver.compute_H0(x, w, Y0);
}

std::vector<double> compute_H1(std::span<const double> x, const EnvWindow& w,
                               std::span<const double> Y0, const SlowFastModel& model,
                               const ManifoldConfig& config) {
    return ManifoldSolver(model, config).compute_H1(x, w, Y0);
}

std::vector<double> compute_Heps(std::span<const double> x, const EnvironmentPaths& env,
                                 std::ptrdiff_t t_index, const SlowFastModel& model,
                                 const ManifoldConfig& config) {
    ManifoldSolver solver(model, config);
    const auto w = make_window(env, t_index, model, config);
    ManifoldSolver::Workspace ws;
    std::vector<double> out(model.m);
    solver.evaluate(x, w, ws, out);
    return out;
}

// ---------------------------------------------------------------------------
// reduced system

Trajectory simulate_reduced_system(const SlowFastModel& model, const NoiseGrid& noise,
                                   const EnvironmentPaths& env, std::span<const double> x_tilde0,
                                   const ManifoldConfig& config, std::size_t refresh_stride) {
    model.check_shapes();
    if (refresh_stride == 0) throw ParameterError("simulate_reduced_system: refresh_stride must be >= 1");
    if (env.dt != noise.dt_fine || env.origin != noise.history_steps ||
        env.count != noise.history_steps + noise.n_steps + 1)
        throw ParameterError("simulate_reduced_system: environment and noise grids differ");
    if (x_tilde0.size() != model.n)
        throw ParameterError("simulate_reduced_system: initial state has wrong size");

    const std::size_t n = model.n, m = model.m, width = n + m;
    const double dt = noise.dt_fine;
    ManifoldSolver solver(model, config);
    ManifoldSolver::Workspace ws;
    StepScratch scratch;
    scratch.resize(n, m);

    Trajectory tr;
    tr.n = n;
    tr.m = m;
    tr.dt = dt;
    tr.times.resize(noise.n_steps + 1);
    tr.states.resize((noise.n_steps + 1) * width);

    std::vector<double> x(x_tilde0.begin(), x_tilde0.end()), y(m), H(m), shifted(n);
    for (std::size_t k = 0; k <= noise.n_steps; ++k) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        if (k % refresh_stride == 0) {
            const auto eta = env.eta_row(env.origin + k);
            for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] - eta[i];
            const auto w = make_window(env, kk, model, config);
            solver.evaluate(shifted, w, ws, H);
        }
        const auto xi = env.xi_row(env.origin + k);
        for (std::size_t i = 0; i < m; ++i) y[i] = H[i] + xi[i];

        tr.times[k] = static_cast<double>(k) * dt;
        std::copy(x.begin(), x.end(), tr.states.begin() + static_cast<std::ptrdiff_t>(k * width));
        std::copy(y.begin(), y.end(), tr.states.begin() + static_cast<std::ptrdiff_t>(k * width + n));
        if (k == noise.n_steps) break;

        slow_euler_update(x, y, model, noise.dV_at(kk), dt, scratch);
        for (double e : x)
            if (!std::isfinite(e))
                throw NumericalBlowup("simulate_reduced_system: non-finite state at step " +
                                          std::to_string(k),
                                      k);
    }
    return tr;
}

TrackingReport tracking_error(const Trajectory& full, const Trajectory& reduced, double window) {
    if (full.size() != reduced.size() || full.n != reduced.n || full.m != reduced.m ||
        std::abs(full.dt - reduced.dt) > 1e-15 * std::max(1.0, full.dt))
        throw ParameterError("tracking_error: trajectories are on different grids");
    TrackingReport rep;
    rep.window = window;
    rep.times = full.times;
    rep.error.resize(full.size());
    const std::size_t width = full.n + full.m;
    for (std::size_t k = 0; k < full.size(); ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < width; ++c) {
            const double d = full.states[k * width + c] - reduced.states[k * width + c];
            s += d * d;
        }
        rep.error[k] = std::sqrt(s);
    }

    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < full.size(); ++k) {
        const double t = full.times[k] - full.times[0];
        if (t > window * (1.0 + 1e-12)) break;
        if (!(rep.error[k] > 0.0)) continue;
        const double l = std::log(rep.error[k]);
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
        ++cnt;
    }
    if (cnt >= 2) {
        const double c = static_cast<double>(cnt);
        const double den = c * stt - st * st;
        if (den > 0.0) rep.rate = -(c * stl - st * sl) / den;
    }
    return rep;
}

} // namespace rmf
