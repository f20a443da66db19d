#include "rmf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "rmf/errors.hpp"
#include "rmf/noise.hpp"
#include "rmf/sde.hpp"

namespace rmf {

ReducedContext make_reduced_context(const SlowFastModel& model, const ReducedOptions& options,
                                    double dt, std::size_t n_steps, std::uint64_t seed) {
    if (!(dt > 0.0)) throw ParameterError("make_reduced_context: dt must be positive");
    ReducedContext ctx;
    ctx.model = &model;
    ctx.dt = dt;
    ctx.xi_mode = options.xi_mode;
    ctx.manifold = options.manifold;
    ctx.stride = options.refresh_stride;
    if (ctx.stride == 0) {
        const auto r = std::llround(options.manifold.h_quad * model.epsilon / dt);
        ctx.stride = static_cast<std::size_t>(std::max<long long>(1, r));
    }
    ctx.manifold.h_quad = static_cast<double>(ctx.stride) * dt / model.epsilon;
    ctx.manifold.validate();
    ctx.K = ctx.manifold.node_count();
    ctx.ou = ou_coefficients(model, dt);

    if (!model.A_is_diagonal()) throw UnsupportedModel("reduced filter: A must be diagonal");
    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.n; ++i) min_rate = std::min(min_rate, model.A_diag(i));
    if (!(min_rate > 0.0)) throw UnsupportedModel("reduced filter: A must have positive diagonal");

    NoiseGridSpec spec;
    spec.n = model.n;
    spec.m = model.m;
    spec.dt_fine = dt;
    spec.t_end = static_cast<double>(n_steps) * dt;
    spec.history_ext = ctx.K * ctx.stride;
    spec.future_ext =
        static_cast<std::size_t>(std::ceil(ctx.manifold.s_trunc / (min_rate * dt))) + 1;
    spec.seed = derive_seed(seed, {stream::kEnvironment});
    const auto grid = generate_noise_grid(spec);
    ctx.eta = sample_eta_path(grid, model, ctx.manifold);
    ctx.origin = grid.history_steps;
    if (ctx.xi_mode == XiMode::Shared) ctx.shared_xi = sample_xi_path(grid, model, XiScheme::Exact);
    return ctx;
}

namespace {

void init_reduced(ParticleEnsemble& ens, const ReducedContext& ctx, const ManifoldSolver& solver,
                  const SlowFastModel& model, std::uint64_t seed) {
    const std::size_t m = ens.m, len = ctx.K + 1;
    ens.nodes_per_particle = len;
    ens.xi_nodes.assign(ens.count * len * m, 0.0);
    ens.ring_head = ctx.slot(0);

    if (ctx.xi_mode == XiMode::PerParticle) {
        // Stationary start, then exact OU steps of one node spacing backwards
        // (the stationary OU process is reversible).
        const auto node_ou = ou_coefficients(model, static_cast<double>(ctx.stride) * ctx.dt);
        std::vector<double> cur(m), z(m);
        for (std::size_t j = 0; j < ens.count; ++j) {
            GaussianStream rng(derive_seed(seed, {stream::kParticleXiHistory, j}));
            for (std::size_t i = 0; i < m; ++i) cur[i] = node_ou.stationary_sd[i] * rng();
            auto xi = ens.xi_of(j);
            std::copy(cur.begin(), cur.end(), xi.begin());
            push_xi_node(ens, j, ctx.slot(0));
            for (std::size_t b = 1; b <= ctx.K; ++b) {
                rng.fill(z);
                ou_exact_step(cur, node_ou, z);
                double* dst = ens.xi_nodes.data() +
                              (j * len + ctx.slot(-static_cast<std::ptrdiff_t>(b))) * m;
                std::copy(cur.begin(), cur.end(), dst);
            }
        }
    } else {
        const auto xi0 = ctx.shared_xi_at(0);
        for (std::size_t j = 0; j < ens.count; ++j)
            std::copy(xi0.begin(), xi0.end(), ens.xi_of(j).begin());
    }

    KernelScratch scratch;
    for (std::size_t j = 0; j < ens.count; ++j) refresh_manifold(ens, j, ctx, solver, 0, scratch);
}

} // namespace

FilterSeries run_filter(const SlowFastModel& model, const ObservationModel& h,
                        const ObservationPath& obs, const FilterSetup& setup) {
    const auto& p = setup.params;
    if (p.n_particles == 0) throw ParameterError("run_filter: need at least one particle");
    if (p.m_sub == 0) throw ParameterError("run_filter: m_sub must be >= 1");
    if (!(p.dt_coarse > 0.0) || !(p.horizon > 0.0))
        throw ParameterError("run_filter: dt_coarse and horizon must be positive");
    if (!setup.prior) throw ParameterError("run_filter: no prior sampler");
    if (!setup.phi) throw ParameterError("run_filter: no test function");
    model.check_shapes();

    const double dt = p.dt_coarse / static_cast<double>(p.m_sub);
    const std::size_t n_coarse = steps_for(p.horizon, p.dt_coarse);
    const std::size_t n_fine = n_coarse * p.m_sub;
    if (std::abs(obs.dt - dt) > 1e-12 * dt)
        throw ParameterError("run_filter: observation step " + std::to_string(obs.dt) +
                             " differs from the filter step " + std::to_string(dt));
    if (obs.dr.size() < n_fine)
        throw ParameterError("run_filter: observation path covers " +
                             std::to_string(obs.dr.size()) + " steps, need " +
                             std::to_string(n_fine));
    if (setup.flavor == Flavor::Full && dt > model.epsilon / 10.0 * (1.0 + 1e-12))
        throw ParameterError("run_filter: fine step " + std::to_string(dt) +
                             " exceeds epsilon/10 for the full filter");

    GaussianStream prior_rng(derive_seed(p.seed, {stream::kPrior}));
    auto ens = pf_init(p.n_particles, model.n, model.m, setup.prior, setup.flavor, prior_rng);
    ParticleStreams streams(p.n_particles, p.seed);

    std::optional<ReducedContext> ctx;
    std::optional<ManifoldSolver> solver;
    if (setup.flavor == Flavor::Reduced) {
        ctx.emplace(make_reduced_context(model, setup.reduced, dt, n_fine, p.seed));
        solver.emplace(model, ctx->manifold);
        init_reduced(ens, *ctx, *solver, model, p.seed);
    }
    const ReducedContext* cptr = ctx ? &*ctx : nullptr;
    const ManifoldSolver* sptr = solver ? &*solver : nullptr;

    FilterSeries out;
    out.flavor = setup.flavor;
    out.times.reserve(n_coarse);
    out.estimates.reserve(n_coarse);
    out.phi_variance.reserve(n_coarse);
    out.ess.reserve(n_coarse);
    out.log_normalizer.reserve(n_coarse);

    const std::span<const double> dr_all(obs.dr);
    std::vector<double> phis(p.n_particles);
    for (std::size_t c = 0; c < n_coarse; ++c) {
        const std::size_t k0 = c * p.m_sub;
        const auto dr = dr_all.subspan(k0, p.m_sub);
        if (setup.execution == Execution::Parallel)
            advance_parallel(ens, model, h, dr, dt, k0, streams, cptr, sptr);
        else
            advance_serial(ens, model, h, dr, dt, k0, streams, cptr, sptr);

        const auto w = ens.normalized_weights();
        double mean = 0.0, sq = 0.0, s2 = 0.0;
        for (std::size_t j = 0; j < ens.count; ++j) {
            phis[j] = setup.phi(ens.x_of(j));
            mean += w[j] * phis[j];
            s2 += w[j] * w[j];
        }
        for (std::size_t j = 0; j < ens.count; ++j) sq += w[j] * (phis[j] - mean) * (phis[j] - mean);

        out.times.push_back(static_cast<double>(c + 1) * p.dt_coarse);
        out.estimates.push_back(mean);
        out.phi_variance.push_back(sq);
        out.ess.push_back(1.0 / s2);
        out.log_normalizer.push_back(ens.log_evidence + ens.log_total_mass() -
                                     std::log(static_cast<double>(ens.count)));

        if (std::find(setup.snapshot_steps.begin(), setup.snapshot_steps.end(), c + 1) !=
            setup.snapshot_steps.end()) {
            FilterSnapshot snap;
            snap.coarse_index = c + 1;
            snap.time = out.times.back();
            snap.measure.weights = w;
            snap.measure.points.resize(ens.count);
            for (std::size_t j = 0; j < ens.count; ++j) snap.measure.points[j] = ens.x_of(j)[0];
            out.snapshots.push_back(std::move(snap));
        }
        deterministic_resample(ens);
    }
    return out;
}

} // namespace rmf
