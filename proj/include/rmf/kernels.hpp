#pragma once

// Particle propagation kernels.
//
// Within one coarse step particles do not interact (resampling happens only
// at coarse boundaries), so the sub-steps of each particle can be fused and
// the particle loop run in parallel. The serial reference walks the same
// sub-steps step-by-step through the public single-step operations
// (pf_weight_update, pf_propagate) and must agree bit-for-bit with the
// OpenMP kernels, because every particle owns its random streams.

#include <cstddef>
#include <span>
#include <vector>

#include "rmf/ensemble.hpp"
#include "rmf/manifold.hpp"
#include "rmf/model.hpp"
#include "rmf/random.hpp"
#include "rmf/sde.hpp"

namespace rmf {

enum class XiMode { PerParticle, Shared };

// One V and one W stream per particle slot.
struct ParticleStreams {
    std::vector<GaussianStream> v;
    std::vector<GaussianStream> w;

    ParticleStreams() = default;
    ParticleStreams(std::size_t count, std::uint64_t seed);
};

// Everything the reduced flavor needs besides the particles themselves.
// The quadrature nodes are aligned with the fine grid: node spacing in
// physical time is `stride` fine steps, so node k of a window at fine step t
// sits exactly at fine step t − k·stride.
struct ReducedContext {
    const SlowFastModel* model = nullptr;
    ManifoldConfig manifold;  // h_quad = stride·dt/ε
    std::size_t stride = 1;
    std::size_t K = 0;
    double dt = 0.0;
    OuCoefficients ou;        // per fine step

    // Shared η on the fine grid, index origin + k for fine step k ≥ −K·stride.
    std::vector<double> eta;
    std::size_t origin = 0;

    XiMode xi_mode = XiMode::PerParticle;
    std::vector<double> shared_xi;  // fine grid, same indexing as eta (Shared mode)

    std::span<const double> eta_at(std::ptrdiff_t k) const {
        return {eta.data() + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(origin) + k) *
                                 model->n,
                model->n};
    }
    // Ring slot of quadrature node `node` (fine step node·stride, may be negative).
    std::size_t slot(std::ptrdiff_t node) const {
        const auto len = static_cast<std::ptrdiff_t>(K + 1);
        return static_cast<std::size_t>(((node % len) + len) % len);
    }
    std::span<const double> shared_xi_at(std::ptrdiff_t k) const {
        return {shared_xi.data() +
                    static_cast<std::size_t>(static_cast<std::ptrdiff_t>(origin) + k) * model->m,
                model->m};
    }
};

// Per-thread scratch.
struct KernelScratch {
    StepScratch step;
    std::vector<double> dV, dW, yfull;
    EnvWindow window;
    ManifoldSolver::Workspace manifold;
    std::vector<double> xarg;
};

// Re-evaluates the held manifold value of particle j at fine step k.
void refresh_manifold(ParticleEnsemble& ens, std::size_t j, const ReducedContext& ctx,
                      const ManifoldSolver& solver, std::ptrdiff_t k, KernelScratch& scratch);

// Stores the current ξ of particle j in ring slot `slot` (reduced flavor).
void push_xi_node(ParticleEnsemble& ens, std::size_t j, std::size_t slot);

// One sub-step for every particle with explicit increments (count×n, count×m),
// full flavor only. `step` is the fine step index used in error reports.
void pf_propagate_with(ParticleEnsemble& ens, const SlowFastModel& model,
                       std::span<const double> dV, std::span<const double> dW, double dt,
                       std::size_t step);

// One sub-step for every particle from fine step k to k+1, drawing increments
// from the particles' streams. For the reduced flavor `ctx` and `solver` are
// required.
void pf_propagate(ParticleEnsemble& ens, const SlowFastModel& model, ParticleStreams& streams,
                  double dt, std::size_t k, const ReducedContext* ctx = nullptr,
                  const ManifoldSolver* solver = nullptr);

// Runs dr.size() rounds of (weight, propagate) starting at fine step k0.
void advance_serial(ParticleEnsemble& ens, const SlowFastModel& model, const ObservationModel& h,
                    std::span<const double> dr, double dt, std::size_t k0,
                    ParticleStreams& streams, const ReducedContext* ctx = nullptr,
                    const ManifoldSolver* solver = nullptr);

void advance_parallel(ParticleEnsemble& ens, const SlowFastModel& model,
                      const ObservationModel& h, std::span<const double> dr, double dt,
                      std::size_t k0, ParticleStreams& streams,
                      const ReducedContext* ctx = nullptr, const ManifoldSolver* solver = nullptr);

} // namespace rmf
