#include "rmf/noise.hpp"

#include <cmath>
#include <string>

#include "rmf/errors.hpp"
#include "rmf/random.hpp"

namespace rmf {

std::size_t steps_for(double span, double dt) {
    const double ratio = span / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    return steps == 0 ? 1 : steps;
}

namespace {

// Fills rows [first, first + count) of `out` (row width `width`), one row per
// step, drawing in the given direction so that row `first` (forward) or row
// `first + count - 1` (backward) is always the first draw.
void fill_rows(std::vector<double>& out, std::size_t width, std::size_t first, std::size_t count,
               bool backward, GaussianStream& rng, double scale) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t row = backward ? first + count - 1 - i : first + i;
        for (std::size_t c = 0; c < width; ++c) out[row * width + c] = scale * rng();
    }
}

} // namespace

NoiseGrid generate_noise_grid(const NoiseGridSpec& spec) {
    if (!(spec.dt_fine > 0.0) || !std::isfinite(spec.dt_fine))
        throw ParameterError("noise grid: dt_fine must be positive, got " +
                             std::to_string(spec.dt_fine));
    if (!(spec.t_end > 0.0) || !std::isfinite(spec.t_end))
        throw ParameterError("noise grid: t_end must be positive, got " +
                             std::to_string(spec.t_end));

    NoiseGrid g;
    g.dt_fine = spec.dt_fine;
    g.n = spec.n;
    g.m = spec.m;
    g.history_steps = spec.history_ext;
    g.n_steps = steps_for(spec.t_end, spec.dt_fine);
    g.future_extension = spec.future_ext;
    g.seed = spec.seed;
    g.t0 = -static_cast<double>(spec.history_ext) * spec.dt_fine;

    const std::size_t total = g.total_steps();
    const std::size_t ahead = g.n_steps + g.future_extension;
    const double sd = std::sqrt(spec.dt_fine);
    g.dV.assign(total * g.n, 0.0);
    g.dW.assign(total * g.m, 0.0);
    g.dU.assign(total, 0.0);

    GaussianStream v(derive_seed(spec.seed, {stream::kV}));
    GaussianStream w(derive_seed(spec.seed, {stream::kW}));
    GaussianStream u(derive_seed(spec.seed, {stream::kU}));
    fill_rows(g.dV, g.n, g.history_steps, ahead, false, v, sd);
    fill_rows(g.dW, g.m, g.history_steps, ahead, false, w, sd);
    fill_rows(g.dU, 1, g.history_steps, ahead, false, u, sd);

    if (g.history_steps > 0) {
        GaussianStream vh(derive_seed(spec.seed, {stream::kVHistory}));
        GaussianStream wh(derive_seed(spec.seed, {stream::kWHistory}));
        GaussianStream uh(derive_seed(spec.seed, {stream::kUHistory}));
        fill_rows(g.dV, g.n, 0, g.history_steps, true, vh, sd);
        fill_rows(g.dW, g.m, 0, g.history_steps, true, wh, sd);
        fill_rows(g.dU, 1, 0, g.history_steps, true, uh, sd);
    }
    return g;
}

} // namespace rmf
