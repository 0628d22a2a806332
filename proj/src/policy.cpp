#include "mecsim/policy.hpp"

#include <algorithm>
#include <cmath>

namespace mecsim {

double assignment_probability(double x, double shape_p, double threshold_t) {
  if (shape_p <= 0.0) throw ConfigError("assignment shape p must be > 0");
  if (threshold_t <= 0.0 || threshold_t > 1.0)
    throw ConfigError("assignment threshold T must be in (0, 1]");
  if (x <= 0.0 || x >= threshold_t) return 0.0;
  const double mp = std::pow(shape_p, shape_p) / std::pow(shape_p + 1.0, shape_p + 1.0) *
                    std::pow(threshold_t, shape_p + 1.0);
  const double f = std::pow(x, shape_p) * (threshold_t - x) / mp;
  return std::clamp(f, 0.0, 1.0);
}

double high_migration_probability(double x, double threshold_th, double shape_beta) {
  if (threshold_th >= 1.0)
    throw ConfigError("migration threshold T_h must be < 1");
  if (shape_beta <= 0.0) throw ConfigError("migration shape beta must be > 0");
  if (x <= threshold_th) return 0.0;
  if (x >= 1.0) return 1.0;
  const double base = 1.0 + (x - 1.0) / (1.0 - threshold_th);
  return std::pow(base, shape_beta);
}

namespace {

int user_index_of(const World& world, const EdgeService& svc) {
  return world.user_index.at(svc.user_id);
}

}  // namespace

double service_delay_ms(const World& world, const IntervalContext& ctx, const SimConfig& config,
                        const EdgeService& svc) {
  if (!svc.current_server_id) throw ConfigError("service_delay_ms: service not placed");
  const EdgeServer& server = world.server(*svc.current_server_id);
  const MobileUser& user = world.user(svc.user_id);
  const int uidx = user_index_of(world, svc);
  const int current_station = ctx.user_station[uidx];
  if (current_station < 0) throw ConfigError("service_delay_ms: user has no station in range");
  const double comm =
      communication_delay_ms(user, ctx.user_station_m[uidx], current_station,
                             server.base_station_id, *ctx.paths, config.channel,
                             config.bits_per_instruction);
  const double comp = computation_delay_ms(user.task_size_mi, svc.requested_mips,
                                           world.requested_mips_on(server), server.capacity_mips);
  return comm + comp;
}

double estimated_delay_ms(const World& world, const IntervalContext& ctx, const SimConfig& config,
                          const EdgeService& svc, const EdgeServer& candidate) {
  const MobileUser& user = world.user(svc.user_id);
  const int uidx = user_index_of(world, svc);
  const int current_station = ctx.user_station[uidx];
  if (current_station < 0) throw ConfigError("estimated_delay_ms: user has no station in range");
  const double comm =
      communication_delay_ms(user, ctx.user_station_m[uidx], current_station,
                             candidate.base_station_id, *ctx.paths, config.channel,
                             config.bits_per_instruction);
  const double comp = computation_delay_ms(
      user.task_size_mi, svc.requested_mips,
      world.requested_mips_on(candidate) + svc.requested_mips, candidate.capacity_mips);
  return comm + comp;
}

std::optional<int> scale_up(World& world, const GeoPoint& near, const EdgeService& svc,
                            double oversubscription_limit) {
  int best = -1;
  double best_dist = 0.0;
  for (const EdgeServer& s : world.servers) {
    if (s.powered_on) continue;
    if (!world.admissible(s, svc, oversubscription_limit)) continue;
    const double d = distance_m(world.station(s.base_station_id).location, near);
    if (best < 0 || d < best_dist || (d == best_dist && s.id < best)) {
      best = s.id;
      best_dist = d;
    }
  }
  if (best < 0) return std::nullopt;
  world.server(best).powered_on = true;
  return best;
}

namespace {

void record_migration(World& world, const IntervalContext& ctx, EdgeService& svc, int source,
                      int dest, std::vector<MigrationEvent>& events) {
  const double cost = migration_cost_km(source, dest, world);
  svc.migration_log.push_back({ctx.interval, source, dest, cost});
  events.push_back({svc.id, source, dest, cost});
}

// ---------------------------------------------------------------------------
// PDMA: Bernoulli-trial assignment plus the two-phase migration pass.
// ---------------------------------------------------------------------------

class PdmaPolicy final : public SchedulingPolicy {
 public:
  explicit PdmaPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string_view name() const override { return "pdma"; }

  std::optional<int> assign(World& world, const IntervalContext& ctx, const SimConfig& config,
                            int service_id, bool initial) override {
    return assign_impl(world, ctx, config, service_id, initial, nullptr);
  }

  std::vector<MigrationEvent> migrate_pass(World& world, const IntervalContext& ctx,
                                           const SimConfig& config) override {
    std::vector<MigrationEvent> events;

    // Phase 1: delay violations. Services whose end-to-end delay reached the
    // threshold are deallocated first, then reassigned in discovery order.
    std::vector<std::pair<int, int>> to_migrate;  // (service id, source server)
    for (const EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      const std::vector<int> hosted(server.hosted_service_ids.begin(),
                                    server.hosted_service_ids.end());
      for (int sid : hosted) {
        EdgeService& svc = world.service(sid);
        const int uidx = world.user_index.at(svc.user_id);
        if (ctx.user_station[uidx] < 0) continue;  // no radio link, no request
        const double delay = service_delay_ms(world, ctx, config, svc);
        if (delay >= config.policy.delay_threshold_ms) {
          to_migrate.emplace_back(sid, server.id);
          svc.location = world.station(server.base_station_id).location;
          world.deallocate(sid);
        }
      }
    }
    reassign(world, ctx, config, to_migrate, nullptr, events);

    // Phase 2: over-utilized servers. A successful trial evicts the busiest
    // services until the server is no longer overloaded; evictions complete
    // across all servers before any reassignment. Every server that passed
    // its trial stays excluded from the reassignments of this pass, so its
    // utilization cannot climb back above the threshold here.
    to_migrate.clear();
    std::set<int> trial_sources;
    for (EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      const double x = server_cpu_utilization(server, world, ctx.interval);
      if (x <= config.overload_threshold) continue;
      const double prob = high_migration_probability(x, config.policy.migration_threshold,
                                                     config.policy.migration_shape_beta);
      if (rng_.uniform01() >= prob) continue;
      trial_sources.insert(server.id);

      std::vector<int> order(server.hosted_service_ids.begin(), server.hosted_service_ids.end());
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const EdgeService& sa = world.service(a);
        const EdgeService& sb = world.service(b);
        const double ua = sa.workload_trace[ctx.interval] * sa.requested_mips;
        const double ub = sb.workload_trace[ctx.interval] * sb.requested_mips;
        if (ua != ub) return ua > ub;
        return a < b;
      });
      for (int sid : order) {
        if (server_cpu_utilization(server, world, ctx.interval) <= config.overload_threshold)
          break;
        EdgeService& svc = world.service(sid);
        svc.location = world.station(server.base_station_id).location;
        world.deallocate(sid);
        to_migrate.emplace_back(sid, server.id);
      }
    }
    reassign(world, ctx, config, to_migrate, &trial_sources, events);
    return events;
  }

 private:
  // `excluded` is null for delay-triggered reassignments (the source drops
  // out naturally, its delay estimate still violating the threshold) and the
  // successful-trial set for overload-triggered ones. Landing back on the
  // source is a re-placement, not a migration.
  void reassign(World& world, const IntervalContext& ctx, const SimConfig& config,
                const std::vector<std::pair<int, int>>& to_migrate,
                const std::set<int>* excluded, std::vector<MigrationEvent>& events) {
    for (const auto& [sid, source] : to_migrate) {
      const auto dest = assign_impl(world, ctx, config, sid, false, excluded);
      if (!dest) {
        events.push_back({sid, source, std::nullopt, 0.0});
      } else if (*dest != source) {
        record_migration(world, ctx, world.service(sid), source, *dest, events);
      }
    }
  }

  // Collects one accept/reject Bernoulli trial per candidate server, in
  // ascending server-id order (the documented draw order), then places on
  // the accepting server nearest to the service location; scales up a
  // pooled spare when the candidate list ends up empty.
  std::optional<int> assign_impl(World& world, const IntervalContext& ctx,
                                 const SimConfig& config, int service_id, bool initial,
                                 const std::set<int>* excluded) {
    EdgeService& svc = world.service(service_id);
    const int uidx = world.user_index.at(svc.user_id);
    const int current_station = ctx.user_station[uidx];
    if (current_station < 0) return std::nullopt;
    if (initial) svc.location = ctx.user_pos[uidx];

    const GeoPoint& station_loc = world.station(current_station).location;
    std::vector<int> accepted;
    for (const EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      if (excluded && excluded->count(server.id)) continue;
      const GeoPoint& sloc = world.station(server.base_station_id).location;
      if (distance_m(station_loc, sloc) > config.policy.distance_threshold_m) continue;
      if (!world.admissible(server, svc, config.oversubscription_limit)) continue;
      if (estimated_delay_ms(world, ctx, config, svc, server) >= config.policy.delay_threshold_ms)
        continue;
      const double x = server_cpu_utilization(server, world, ctx.interval);
      const double prob = assignment_probability(x, config.policy.assignment_shape_p,
                                                 config.policy.assignment_threshold);
      if (rng_.uniform01() < prob) accepted.push_back(server.id);
    }

    int chosen = -1;
    double chosen_dist = 0.0;
    for (int id : accepted) {
      const double d = distance_m(world.station_of_server(id).location, svc.location);
      if (chosen < 0 || d < chosen_dist || (d == chosen_dist && id < chosen)) {
        chosen = id;
        chosen_dist = d;
      }
    }
    if (chosen < 0) {
      const auto spare = scale_up(world, station_loc, svc, config.oversubscription_limit);
      if (!spare) return std::nullopt;
      chosen = *spare;
    }
    world.place(service_id, chosen);
    return chosen;
  }

  Rng rng_;
};

// ---------------------------------------------------------------------------
// NF: nearest edge server first. Migrates whenever the user's nearest
// station changes.
// ---------------------------------------------------------------------------

class NearestFirstPolicy : public SchedulingPolicy {
 public:
  std::string_view name() const override { return "nf"; }

  std::optional<int> assign(World& world, const IntervalContext& ctx, const SimConfig& config,
                            int service_id, bool initial) override {
    EdgeService& svc = world.service(service_id);
    const int uidx = world.user_index.at(svc.user_id);
    if (ctx.user_station[uidx] < 0) return std::nullopt;
    if (initial) svc.location = ctx.user_pos[uidx];
    const int chosen = nearest_admissible(world, config, svc, ctx.user_pos[uidx], -1);
    if (chosen < 0) return std::nullopt;
    world.place(service_id, chosen);
    return chosen;
  }

  std::vector<MigrationEvent> migrate_pass(World& world, const IntervalContext& ctx,
                                           const SimConfig& config) override {
    std::vector<MigrationEvent> events;
    for (EdgeService& svc : world.services) {
      if (!svc.current_server_id) continue;
      const int uidx = world.user_index.at(svc.user_id);
      if (ctx.user_station[uidx] < 0) continue;
      const int source = *svc.current_server_id;
      const int source_station = world.server(source).base_station_id;
      const int nearest = nearest_admissible(world, config, svc, ctx.user_pos[uidx], source);
      if (nearest < 0) continue;
      if (world.server(nearest).base_station_id == source_station) continue;
      svc.location = world.station(world.server(nearest).base_station_id).location;
      world.deallocate(svc.id);
      world.place(svc.id, nearest);
      record_migration(world, ctx, svc, source, nearest, events);
    }
    return events;
  }

 protected:
  // Nearest powered-on server that can admit the service; `keep` (the current
  // host) is always considered admissible for staying put.
  static int nearest_admissible(const World& world, const SimConfig& config,
                                const EdgeService& svc, const GeoPoint& pos, int keep) {
    int best = -1;
    double best_dist = 0.0;
    for (const EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      if (server.id != keep && !world.admissible(server, svc, config.oversubscription_limit))
        continue;
      const double d = distance_m(world.station(server.base_station_id).location, pos);
      if (best < 0 || d < best_dist || (d == best_dist && server.id < best)) {
        best = server.id;
        best_dist = d;
      }
    }
    return best;
  }
};

// NM: nearest initial placement, never migrates.
class NeverMigratePolicy final : public NearestFirstPolicy {
 public:
  std::string_view name() const override { return "nm"; }
  std::vector<MigrationEvent> migrate_pass(World&, const IntervalContext&,
                                           const SimConfig&) override {
    return {};
  }
};

// ---------------------------------------------------------------------------
// Top-K: random pick among the ceil(0.1 J) busiest servers; reuses the PDMA
// delay-violation trigger but has no overload phase.
// ---------------------------------------------------------------------------

class TopKPolicy final : public SchedulingPolicy {
 public:
  explicit TopKPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string_view name() const override { return "topk"; }

  std::optional<int> assign(World& world, const IntervalContext& ctx, const SimConfig& config,
                            int service_id, bool initial) override {
    EdgeService& svc = world.service(service_id);
    const int uidx = world.user_index.at(svc.user_id);
    if (ctx.user_station[uidx] < 0) return std::nullopt;
    if (initial) svc.location = ctx.user_pos[uidx];

    std::vector<std::pair<double, int>> by_util;  // (-utilization, id)
    for (const EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      by_util.emplace_back(-server_cpu_utilization(server, world, ctx.interval), server.id);
    }
    if (by_util.empty()) return std::nullopt;
    std::sort(by_util.begin(), by_util.end());
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(0.1 * static_cast<double>(by_util.size())));

    // The K busiest servers that can still admit the service.
    std::vector<int> candidates;
    for (const auto& [neg_util, id] : by_util) {
      if (candidates.size() == k) break;
      if (world.admissible(world.server(id), svc, config.oversubscription_limit))
        candidates.push_back(id);
    }
    if (candidates.empty()) return std::nullopt;
    const int chosen = candidates[rng_.uniform_int(candidates.size())];
    world.place(service_id, chosen);
    return chosen;
  }

  std::vector<MigrationEvent> migrate_pass(World& world, const IntervalContext& ctx,
                                           const SimConfig& config) override {
    std::vector<MigrationEvent> events;
    std::vector<std::pair<int, int>> to_migrate;
    for (const EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      const std::vector<int> hosted(server.hosted_service_ids.begin(),
                                    server.hosted_service_ids.end());
      for (int sid : hosted) {
        EdgeService& svc = world.service(sid);
        const int uidx = world.user_index.at(svc.user_id);
        if (ctx.user_station[uidx] < 0) continue;
        if (service_delay_ms(world, ctx, config, svc) >= config.policy.delay_threshold_ms) {
          to_migrate.emplace_back(sid, server.id);
          svc.location = world.station(server.base_station_id).location;
          world.deallocate(sid);
        }
      }
    }
    for (const auto& [sid, source] : to_migrate) {
      const auto dest = assign(world, ctx, config, sid, false);
      if (dest && *dest != source) {
        record_migration(world, ctx, world.service(sid), source, *dest, events);
      } else if (!dest) {
        events.push_back({sid, source, std::nullopt, 0.0});
      }
    }
    return events;
  }

 private:
  Rng rng_;
};

}  // namespace

std::unique_ptr<SchedulingPolicy> make_policy(std::string_view name, std::uint64_t seed) {
  if (name == "pdma") return std::make_unique<PdmaPolicy>(seed);
  if (name == "nf") return std::make_unique<NearestFirstPolicy>();
  if (name == "nm") return std::make_unique<NeverMigratePolicy>();
  if (name == "topk") return std::make_unique<TopKPolicy>(seed);
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

bool is_known_policy(std::string_view name) {
  return name == "pdma" || name == "nf" || name == "nm" || name == "topk";
}

}  // namespace mecsim
