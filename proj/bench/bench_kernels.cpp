// Serial reference vs fused OpenMP kernel, one coarse step of 400 sub-steps.

#include <benchmark/benchmark.h>

#include <cmath>
#include <optional>
#include <vector>

#include "rmf/ensemble.hpp"
#include "rmf/filter.hpp"
#include "rmf/kernels.hpp"
#include "rmf/model.hpp"

namespace {

constexpr std::size_t kSub = 400;

struct Fixture {
    rmf::SlowFastModel model = rmf::example_model(0.01);
    rmf::ObservationModel h = rmf::arctan_observation();
    double dt = 0.02 / kSub;
    std::vector<double> dr;
    rmf::ReducedContext ctx;
    std::optional<rmf::ManifoldSolver> solver;

    explicit Fixture(rmf::Flavor flavor) : dr(kSub, 0.0) {
        rmf::GaussianStream g(7);
        for (auto& v : dr) v = 0.5 * dt + std::sqrt(dt) * g();
        if (flavor == rmf::Flavor::Reduced) {
            ctx = rmf::make_reduced_context(model, rmf::ReducedOptions{}, dt, kSub * 4, 11);
            solver.emplace(model, ctx.manifold);
        }
    }
};

template <bool Parallel>
void run(benchmark::State& state, rmf::Flavor flavor) {
    Fixture fx(flavor);
    const auto particles = static_cast<std::size_t>(state.range(0));
    rmf::FilterSetup setup;
    setup.flavor = flavor;
    setup.params = {particles, kSub, 0.02, 0.02 * 4, 3};
    setup.prior = rmf::dirac_prior({1.0}, {1.0});
    setup.phi = [](std::span<const double> x) { return x[0]; };
    setup.execution = Parallel ? rmf::Execution::Parallel : rmf::Execution::Serial;
    rmf::ObservationPath obs;
    obs.dt = fx.dt;
    obs.dr.assign(kSub * 4, 0.0);
    for (std::size_t i = 0; i < obs.dr.size(); ++i) obs.dr[i] = fx.dr[i % kSub];
    for (auto _ : state) {
        auto series = rmf::run_filter(fx.model, fx.h, obs, setup);
        benchmark::DoNotOptimize(series.estimates.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(particles * kSub * 4));
}

void BM_FullSerial(benchmark::State& s) { run<false>(s, rmf::Flavor::Full); }
void BM_FullParallel(benchmark::State& s) { run<true>(s, rmf::Flavor::Full); }
void BM_ReducedSerial(benchmark::State& s) { run<false>(s, rmf::Flavor::Reduced); }
void BM_ReducedParallel(benchmark::State& s) { run<true>(s, rmf::Flavor::Reduced); }

} // namespace

BENCHMARK(BM_FullSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FullParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducedSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducedParallel)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
