#ifndef MECSIM_POLICY_HPP_
#define MECSIM_POLICY_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mecsim/model.hpp"
#include "mecsim/network.hpp"
#include "mecsim/rng.hpp"

namespace mecsim {

// Probability that a server accepts a new service at utilization x:
// x^p (T - x) / M_p with M_p = p^p / (p+1)^(p+1) * T^(p+1), zero outside
// (0, T). The normalization puts the maximum, at x = pT/(p+1), exactly at 1.
double assignment_probability(double x, double shape_p, double threshold_t);

// Probability that an over-utilized server agrees to evict services:
// (1 + (x - 1) / (1 - T_h))^beta, clamped to 0 below T_h and 1 above x = 1.
// T_h == 1 is a configuration error.
double high_migration_probability(double x, double threshold_th, double shape_beta);

// Per-interval view the engine hands to policies: the regenerated delay
// matrix with its shortest-path cache, plus each user's position and current
// (nearest in-range) station. station id -1 means no station within the
// distance threshold; such users issue no requests this interval.
struct IntervalContext {
  int interval = 0;
  const DelayMatrix* matrix = nullptr;
  const ShortestPaths* paths = nullptr;
  std::vector<GeoPoint> user_pos;        // by user index
  std::vector<int> user_station;         // station id or -1
  std::vector<double> user_station_m;    // distance to current station
};

// One committed (or failed) service move. dest_server_id is empty when the
// reassignment could not place the service anywhere (placement failure).
struct MigrationEvent {
  int service_id = -1;
  int source_server_id = -1;
  std::optional<int> dest_server_id;
  double cost_km = 0.0;
};

// End-to-end delay of a placed service at its current server: communication
// (uplink + forwarding) plus computation. No migration downtime.
double service_delay_ms(const World& world, const IntervalContext& ctx, const SimConfig& config,
                        const EdgeService& svc);

// Same, evaluated as if the service were placed on `candidate` (its requested
// MIPS added to the candidate's share computation).
double estimated_delay_ms(const World& world, const IntervalContext& ctx, const SimConfig& config,
                          const EdgeService& svc, const EdgeServer& candidate);

// Powers on the idle pooled server nearest to `near` that can admit the
// service, and returns its id; empty when the pool is exhausted. Ties break
// on the lower server id.
std::optional<int> scale_up(World& world, const GeoPoint& near, const EdgeService& svc,
                            double oversubscription_limit);

// Common surface for the probabilistic policy and the baselines. Policies
// own their random stream; the engine serializes all calls, and trials
// within one request consume draws in ascending server-id order.
class SchedulingPolicy {
 public:
  virtual ~SchedulingPolicy() = default;
  virtual std::string_view name() const = 0;

  // Places an unhosted service, mutating the world on success. Returns the
  // chosen server id, or empty on placement failure. `initial` marks the
  // first-ever placement of the service.
  virtual std::optional<int> assign(World& world, const IntervalContext& ctx,
                                    const SimConfig& config, int service_id, bool initial) = 0;

  // Runs the per-interval migration pass, mutating the world and appending
  // MigrationRecords to the moved services' logs.
  virtual std::vector<MigrationEvent> migrate_pass(World& world, const IntervalContext& ctx,
                                                   const SimConfig& config) = 0;
};

// Policy names: pdma | nf | nm | topk.
std::unique_ptr<SchedulingPolicy> make_policy(std::string_view name, std::uint64_t seed);

bool is_known_policy(std::string_view name);

}  // namespace mecsim

#endif  // MECSIM_POLICY_HPP_
