#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rmf/config.hpp"
#include "rmf/filter.hpp"
#include "rmf/manifold.hpp"
#include "rmf/metric.hpp"
#include "rmf/sde.hpp"

namespace rmf {

struct TrackingStats {
    double sup_after_transient = 0.0;  // sup |x − x̃| over [0.5, T]
    double mean_abs = 0.0;             // time average of |x − x̃| over [0, T]
    std::optional<double> rate;
};

// Truth and manifold-reduced slow system on the truth's noise.
struct TrackingRun {
    Trajectory truth;
    Trajectory reduced;
    TrackingReport report;
    TrackingStats stats;
};

struct ReplicationResult {
    std::size_t index = 0;
    FilterSeries full;
    FilterSeries reduced;
    std::vector<double> squared_difference;  // |π(φ) − π̃(φ)|² per coarse time
    std::optional<MetricValue> metric;       // d(π, π̃) at metric_time
    std::optional<TrackingStats> tracking;
};

// Mean-square difference of the two filters over replications.
struct ErrorSeries {
    std::vector<double> times;
    std::vector<double> mse;
    std::vector<double> std_err;
    double time_avg_mse = 0.0;

    std::size_t replications_used = 0;
    std::vector<std::size_t> excluded;  // failed replication indices

    double metric_mean = 0.0;  // E d(π, π̃) at metric_time
    double metric_std_err = 0.0;
};

struct MonteCarloResult {
    ErrorSeries errors;
    std::optional<ReplicationResult> representative;  // lowest successful index
};

// Seed of replication r: derived from (master_seed, r) only.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep_index);

// Truth of replication `rep_index` (same noise as run_single_replication)
// and the reduced system started from x_tilde0.
TrackingRun run_tracking(const ExperimentConfig& config, std::size_t rep_index);

// noise → truth → observations → full and reduced filters on the same path.
ReplicationResult run_single_replication(const ExperimentConfig& config, std::size_t rep_index);

// Runs n_replications (up to `jobs` at a time). Failed replications are
// excluded with a warning on stderr; throws Error if none succeed.
MonteCarloResult monte_carlo_mse(const ExperimentConfig& config);

// Aggregates already computed replications (used by monte_carlo_mse and by
// tests).
ErrorSeries aggregate_replications(const std::vector<ReplicationResult>& reps,
                                   std::vector<std::size_t> excluded = {});

} // namespace rmf
