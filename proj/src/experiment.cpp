#include "rmf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "rmf/errors.hpp"
#include "rmf/manifold.hpp"
#include "rmf/noise.hpp"
#include "rmf/random.hpp"
#include "rmf/sde.hpp"

namespace rmf {

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep_index) {
    return derive_seed(master_seed, {stream::kReplication, rep_index});
}

namespace {

NoiseGrid truth_noise(const ExperimentConfig& config, const SlowFastModel& model,
                      std::uint64_t seed) {
    const double dt = config.dt_fine();
    const std::size_t n_coarse = steps_for(config.horizon, config.dt_coarse);
    NoiseGridSpec spec;
    spec.n = model.n;
    spec.m = model.m;
    spec.dt_fine = dt;
    spec.t_end = static_cast<double>(n_coarse * config.m_sub) * dt;
    spec.seed = derive_seed(seed, {stream::kTruth});
    if (config.track) {
        double min_rate = 1.0;
        if (model.A_is_diagonal())
            for (std::size_t i = 0; i < model.n; ++i) min_rate = std::min(min_rate, model.A_diag(i));
        spec.future_ext =
            static_cast<std::size_t>(std::ceil(config.manifold.s_trunc / (min_rate * dt))) + 1;
        spec.history_ext = static_cast<std::size_t>(
                               std::ceil(config.manifold.s_trunc * model.epsilon / dt)) + 1;
    }
    return generate_noise_grid(spec);
}

TrackingRun track_manifold(const ExperimentConfig& config, const SlowFastModel& model,
                           const NoiseGrid& noise, Trajectory truth) {
    const auto env = build_environment(noise, model, config.manifold, config.xi_scheme);
    const auto stride = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(config.manifold.h_quad * model.epsilon / noise.dt_fine)));
    const std::vector<double> xt0{config.x_tilde0};

    TrackingRun run;
    run.reduced = simulate_reduced_system(model, noise, env, xt0, config.manifold, stride);
    run.report = tracking_error(truth, run.reduced, 5.0 * model.epsilon);
    run.stats.rate = run.report.rate;
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double d = std::abs(truth.x(k)[0] - run.reduced.x(k)[0]);
        total += d;
        if (truth.times[k] >= 0.5 - 1e-12)
            run.stats.sup_after_transient = std::max(run.stats.sup_after_transient, d);
    }
    run.stats.mean_abs = total / static_cast<double>(truth.size());
    run.truth = std::move(truth);
    return run;
}

} // namespace

TrackingRun run_tracking(const ExperimentConfig& config_in, std::size_t rep_index) {
    auto config = config_in;
    config.track = true;
    config.validate();
    const auto model = config.model();
    const auto noise = truth_noise(config, model, replication_seed(config.master_seed, rep_index));
    const std::vector<double> x0{config.x0}, y0{config.y0};
    return track_manifold(config, model, noise, simulate_full_system(model, noise, x0, y0));
}

ReplicationResult run_single_replication(const ExperimentConfig& config, std::size_t rep_index) {
    config.validate();
    const auto model = config.model();
    const auto seed = replication_seed(config.master_seed, rep_index);
    const auto noise = truth_noise(config, model, seed);

    const std::vector<double> x0{config.x0}, y0{config.y0}, xt0{config.x_tilde0};
    const auto truth = simulate_full_system(model, noise, x0, y0);
    const auto h = arctan_observation();
    const std::span<const double> dU(noise.dU.data() + noise.history_steps, noise.n_steps);
    const auto obs = generate_observations(truth, h, dU);

    FilterSetup setup;
    setup.params = {config.n_particles, config.m_sub, config.dt_coarse, config.horizon,
                    derive_seed(seed, {stream::kFilter})};
    setup.phi = make_test_function(config.phi);
    setup.reduced = config.reduced;
    setup.execution = config.execution;
    const auto metric_index =
        static_cast<std::size_t>(std::llround(config.metric_time / config.dt_coarse));
    if (metric_index >= 1) setup.snapshot_steps = {metric_index};

    ReplicationResult res;
    res.index = rep_index;
    setup.flavor = Flavor::Full;
    setup.prior = dirac_prior(x0, y0);
    res.full = run_filter(model, h, obs, setup);
    setup.flavor = Flavor::Reduced;
    setup.prior = dirac_prior(xt0, y0);
    res.reduced = run_filter(model, h, obs, setup);

    res.squared_difference.resize(res.full.estimates.size());
    for (std::size_t i = 0; i < res.squared_difference.size(); ++i) {
        const double d = res.full.estimates[i] - res.reduced.estimates[i];
        res.squared_difference[i] = d * d;
    }
    if (!res.full.snapshots.empty() && !res.reduced.snapshots.empty())
        res.metric = prob_metric_d(res.full.snapshots.front().measure,
                                   res.reduced.snapshots.front().measure, config.metric_terms);
    if (config.track) res.tracking = track_manifold(config, model, noise, truth).stats;
    return res;
}

ErrorSeries aggregate_replications(const std::vector<ReplicationResult>& reps,
                                   std::vector<std::size_t> excluded) {
    if (reps.empty()) throw Error("aggregate_replications: no successful replications");
    ErrorSeries out;
    out.excluded = std::move(excluded);
    out.replications_used = reps.size();
    out.times = reps.front().full.times;
    const std::size_t T = out.times.size();
    const auto R = static_cast<double>(reps.size());
    out.mse.assign(T, 0.0);
    out.std_err.assign(T, 0.0);
    for (const auto& r : reps) {
        if (r.squared_difference.size() != T)
            throw ParameterError("aggregate_replications: replications have different lengths");
        for (std::size_t i = 0; i < T; ++i) out.mse[i] += r.squared_difference[i];
    }
    for (auto& v : out.mse) v /= R;
    if (reps.size() >= 2) {
        for (std::size_t i = 0; i < T; ++i) {
            double ss = 0.0;
            for (const auto& r : reps) {
                const double d = r.squared_difference[i] - out.mse[i];
                ss += d * d;
            }
            out.std_err[i] = std::sqrt(ss / (R - 1.0)) / std::sqrt(R);
        }
    }
    double avg = 0.0;
    for (double v : out.mse) avg += v;
    out.time_avg_mse = T ? avg / static_cast<double>(T) : 0.0;

    std::vector<double> d;
    for (const auto& r : reps)
        if (r.metric) d.push_back(r.metric->value);
    if (!d.empty()) {
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        out.metric_mean = mean;
        if (d.size() >= 2) {
            double ss = 0.0;
            for (double v : d) ss += (v - mean) * (v - mean);
            out.metric_std_err = std::sqrt(ss / static_cast<double>(d.size() - 1)) /
                                 std::sqrt(static_cast<double>(d.size()));
        }
    }
    return out;
}

MonteCarloResult monte_carlo_mse(const ExperimentConfig& config) {
    config.validate();
    const std::size_t R = config.n_replications;
    std::vector<std::optional<ReplicationResult>> slots(R);
    std::vector<std::string> failures(R);
    const auto count = static_cast<std::ptrdiff_t>(R);

#pragma omp parallel for num_threads(static_cast<int>(config.jobs)) schedule(dynamic, 1)
    for (std::ptrdiff_t rr = 0; rr < count; ++rr) {
        const auto r = static_cast<std::size_t>(rr);
        try {
            slots[r] = run_single_replication(config, r);
        } catch (const std::exception& e) {
            failures[r] = e.what();
            if (failures[r].empty()) failures[r] = "unknown failure";
        }
    }

    std::vector<ReplicationResult> ok;
    std::vector<std::size_t> excluded;
    for (std::size_t r = 0; r < R; ++r) {
        if (slots[r]) {
            ok.push_back(std::move(*slots[r]));
        } else {
            excluded.push_back(r);
            std::cerr << "warning: replication " << r << " excluded: " << failures[r] << '\n';
        }
    }
    if (ok.empty()) throw Error("monte_carlo_mse: all " + std::to_string(R) + " replications failed");

    MonteCarloResult result;
    result.errors = aggregate_replications(ok, std::move(excluded));
    result.representative = std::move(ok.front());
    return result;
}

} // namespace rmf
