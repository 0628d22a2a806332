#ifndef MECSIM_SIM_HPP_
#define MECSIM_SIM_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/model.hpp"
#include "mecsim/network.hpp"
#include "mecsim/policy.hpp"
#include "mecsim/traces.hpp"

namespace mecsim {

struct IntervalMetrics {
  int interval = 0;
  double mean_delay_ms = 0.0;
  int served = 0;  // delay samples this interval (in-range users)
  int migrations = 0;
  double migration_cost_km = 0.0;
  int overloaded_servers = 0;
  int placement_failures = 0;
};

struct AggregateMetrics {
  double overall_delay_ms = 0.0;        // mean over all (interval, user) samples
  double total_migration_cost_km = 0.0;
  double mean_overloaded_servers = 0.0;
};

struct MetricsReport {
  std::string policy;
  std::vector<IntervalMetrics> per_interval;
  AggregateMetrics aggregate;

  // One row per interval:
  // interval,mean_delay_ms,served,migrations_count,migration_cost_km,
  // overloaded_servers,placement_failures
  std::string to_csv() const;
};

// Override point for the per-interval delay matrix; the default draws a
// fresh matrix from the engine stream via regenerate_delay_matrix.
using MatrixProvider =
    std::function<DelayMatrix(const std::vector<BaseStation>&, const SimConfig&, Rng&, int)>;

// World construction from a bundle: entities sorted by id, indexes built,
// integrity verified.
World make_world(const TraceBundle& bundle);

// Per-interval context: user positions on the interval grid and each user's
// nearest station within the distance threshold.
IntervalContext make_context(const World& world, const DelayMatrix& matrix,
                             const ShortestPaths& paths, const SimConfig& config,
                             double t0_s, int interval);

// Drives the discrete-time simulation for config.horizon_intervals intervals
// and accumulates the per-interval and aggregate metrics.
MetricsReport run(const TraceBundle& bundle, const SimConfig& config,
                  const std::string& policy_name,
                  std::optional<std::uint64_t> policy_seed = std::nullopt,
                  const MatrixProvider& matrix_provider = nullptr);

// Runs each policy on the same bundle with identical world inputs (same
// engine stream, hence the same per-interval matrices) and an independent
// policy stream derived from (config seed, policy name).
std::map<std::string, MetricsReport> compare_policies(const TraceBundle& bundle,
                                                      const SimConfig& config,
                                                      const std::vector<std::string>& policies);

// Bounded-worker parallel loop; results must be written into index-addressed
// slots by `fn` to stay deterministic. max_workers <= 0 uses the hardware
// concurrency.
void parallel_for_indexed(std::size_t n, const std::function<void(std::size_t)>& fn,
                          int max_workers = 0);

}  // namespace mecsim

#endif  // MECSIM_SIM_HPP_
