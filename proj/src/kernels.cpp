#include "rmf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include <omp.h>

#include "rmf/errors.hpp"

namespace rmf {

ParticleStreams::ParticleStreams(std::size_t count, std::uint64_t seed) {
    v.reserve(count);
    w.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        v.emplace_back(derive_seed(seed, {stream::kParticleV, j}));
        w.emplace_back(derive_seed(seed, {stream::kParticleW, j}));
    }
}

namespace {

void prepare_scratch(KernelScratch& s, const ParticleEnsemble& ens, const ReducedContext* ctx) {
    s.step.resize(ens.n, ens.m);
    s.dV.resize(ens.n);
    s.dW.resize(ens.m);
    s.yfull.resize(ens.m);
    s.xarg.resize(ens.n);
    if (ctx && (s.window.K != ctx->K || s.window.n != ens.n || s.window.m != ens.m))
        s.window = EnvWindow(ens.n, ens.m, ctx->K);
}

void check_finite(std::span<const double> v, std::size_t step, std::size_t j) {
    for (double e : v)
        if (!std::isfinite(e))
            throw NumericalBlowup("particle " + std::to_string(j) + " left the finite range at step " +
                                      std::to_string(step),
                                  step, j);
}

void weight_particle(ParticleEnsemble& ens, std::size_t j, const ObservationModel& h, double dr,
                     double dt, KernelScratch& s) {
    ens.fast_state(j, s.yfull);
    const double hv = h.h(ens.x_of(j), s.yfull);
    ens.log_w[j] += weight_increment(hv, dr, dt);
}

// Advances particle j from fine step k to k + 1.
void propagate_particle(ParticleEnsemble& ens, std::size_t j, const SlowFastModel& model,
                        ParticleStreams& streams, double dt, std::size_t k,
                        const ReducedContext* ctx, const ManifoldSolver* solver,
                        KernelScratch& s) {
    const double sq = std::sqrt(dt);
    streams.v[j].fill(s.dV, sq);
    if (ens.flavor == Flavor::Full) {
        streams.w[j].fill(s.dW, sq);
        euler_maruyama_step(ens.x_of(j), ens.y_of(j), model, s.dV, s.dW, dt, s.step, k);
        return;
    }

    ens.fast_state(j, s.yfull);
    slow_euler_update(ens.x_of(j), s.yfull, model, s.dV, dt, s.step);
    check_finite(ens.x_of(j), k, j);

    const auto kn = static_cast<std::ptrdiff_t>(k + 1);
    auto xi = ens.xi_of(j);
    if (ctx->xi_mode == XiMode::PerParticle) {
        streams.w[j].fill(s.dW, 1.0);
        ou_exact_step(xi, ctx->ou, s.dW);
    } else {
        const auto src = ctx->shared_xi_at(kn);
        std::copy(src.begin(), src.end(), xi.begin());
    }

    if ((k + 1) % ctx->stride == 0) {
        const auto node = kn / static_cast<std::ptrdiff_t>(ctx->stride);
        if (ctx->xi_mode == XiMode::PerParticle) push_xi_node(ens, j, ctx->slot(node));
        refresh_manifold(ens, j, *ctx, *solver, kn, s);
        check_finite(ens.y_of(j), k, j);
    }
}

void require_reduced(const ParticleEnsemble& ens, const ReducedContext* ctx,
                     const ManifoldSolver* solver) {
    if (ens.flavor == Flavor::Reduced && (!ctx || !solver))
        throw ParameterError("reduced particles need a context and a manifold solver");
}

void update_ring_head(ParticleEnsemble& ens, const ReducedContext* ctx, std::size_t k_end) {
    if (ens.flavor != Flavor::Reduced || !ctx) return;
    ens.ring_head = ctx->slot(static_cast<std::ptrdiff_t>(k_end / ctx->stride));
}

} // namespace

void push_xi_node(ParticleEnsemble& ens, std::size_t j, std::size_t slot) {
    const auto xi = ens.xi_of(j);
    std::copy(xi.begin(), xi.end(),
              ens.xi_nodes.begin() +
                  static_cast<std::ptrdiff_t>((j * ens.nodes_per_particle + slot) * ens.m));
}

void refresh_manifold(ParticleEnsemble& ens, std::size_t j, const ReducedContext& ctx,
                      const ManifoldSolver& solver, std::ptrdiff_t k, KernelScratch& s) {
    prepare_scratch(s, ens, &ctx);
    const auto stride = static_cast<std::ptrdiff_t>(ctx.stride);
    const std::ptrdiff_t node = k / stride;
    const std::size_t m = ens.m;
    for (std::size_t i = 0; i <= ctx.K; ++i) {
        const std::ptrdiff_t kk = k - static_cast<std::ptrdiff_t>(i) * stride;
        const auto eta = ctx.eta_at(kk);
        std::copy(eta.begin(), eta.end(), s.window.eta_node(i).begin());
        if (ctx.xi_mode == XiMode::PerParticle) {
            const std::size_t slot = ctx.slot(node - static_cast<std::ptrdiff_t>(i));
            const double* src = ens.xi_nodes.data() + (j * ens.nodes_per_particle + slot) * m;
            std::copy(src, src + m, s.window.xi_node(i).begin());
        } else {
            const auto xi = ctx.shared_xi_at(kk);
            std::copy(xi.begin(), xi.end(), s.window.xi_node(i).begin());
        }
    }
    const auto eta_now = ctx.eta_at(k);
    const auto x = ens.x_of(j);
    for (std::size_t i = 0; i < ens.n; ++i) s.xarg[i] = x[i] - eta_now[i];
    solver.evaluate(s.xarg, s.window, s.manifold, ens.y_of(j));
}

void pf_propagate_with(ParticleEnsemble& ens, const SlowFastModel& model,
                       std::span<const double> dV, std::span<const double> dW, double dt,
                       std::size_t step) {
    if (ens.flavor != Flavor::Full)
        throw ParameterError("pf_propagate_with: full-flavor ensembles only");
    if (dV.size() != ens.count * ens.n || dW.size() != ens.count * ens.m)
        throw ParameterError("pf_propagate_with: increment arrays have the wrong size");
    StepScratch scratch;
    scratch.resize(ens.n, ens.m);
    for (std::size_t j = 0; j < ens.count; ++j)
        euler_maruyama_step(ens.x_of(j), ens.y_of(j), model, dV.subspan(j * ens.n, ens.n),
                            dW.subspan(j * ens.m, ens.m), dt, scratch, step);
}

void pf_propagate(ParticleEnsemble& ens, const SlowFastModel& model, ParticleStreams& streams,
                  double dt, std::size_t k, const ReducedContext* ctx,
                  const ManifoldSolver* solver) {
    require_reduced(ens, ctx, solver);
    KernelScratch s;
    prepare_scratch(s, ens, ctx);
    for (std::size_t j = 0; j < ens.count; ++j)
        propagate_particle(ens, j, model, streams, dt, k, ctx, solver, s);
    update_ring_head(ens, ctx, k + 1);
}

void advance_serial(ParticleEnsemble& ens, const SlowFastModel& model, const ObservationModel& h,
                    std::span<const double> dr, double dt, std::size_t k0,
                    ParticleStreams& streams, const ReducedContext* ctx,
                    const ManifoldSolver* solver) {
    for (std::size_t s = 0; s < dr.size(); ++s) {
        pf_weight_update(ens, h, dr[s], dt);
        pf_propagate(ens, model, streams, dt, k0 + s, ctx, solver);
    }
}

void advance_parallel(ParticleEnsemble& ens, const SlowFastModel& model,
                      const ObservationModel& h, std::span<const double> dr, double dt,
                      std::size_t k0, ParticleStreams& streams, const ReducedContext* ctx,
                      const ManifoldSolver* solver) {
    require_reduced(ens, ctx, solver);
    std::exception_ptr failure;
    bool failed = false;
    const auto count = static_cast<std::ptrdiff_t>(ens.count);

#pragma omp parallel
    {
        KernelScratch s;
        prepare_scratch(s, ens, ctx);
#pragma omp for schedule(static)
        for (std::ptrdiff_t jj = 0; jj < count; ++jj) {
            bool skip;
#pragma omp atomic read
            skip = failed;
            if (skip) continue;
            const auto j = static_cast<std::size_t>(jj);
            try {
                for (std::size_t st = 0; st < dr.size(); ++st) {
                    weight_particle(ens, j, h, dr[st], dt, s);
                    propagate_particle(ens, j, model, streams, dt, k0 + st, ctx, solver, s);
                }
            } catch (...) {
#pragma omp critical(rmf_kernel_failure)
                {
                    if (!failure) failure = std::current_exception();
                }
#pragma omp atomic write
                failed = true;
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    update_ring_head(ens, ctx, k0 + dr.size());
}

} // namespace rmf
