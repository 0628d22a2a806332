#include "mecsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace mecsim {

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "interval,mean_delay_ms,served,migrations_count,migration_cost_km,"
         "overloaded_servers,placement_failures\n";
  for (const IntervalMetrics& m : per_interval) {
    out << m.interval << ',' << m.mean_delay_ms << ',' << m.served << ',' << m.migrations << ','
        << m.migration_cost_km << ',' << m.overloaded_servers << ',' << m.placement_failures
        << '\n';
  }
  return out.str();
}

World make_world(const TraceBundle& bundle) {
  World world;
  world.stations = bundle.stations;
  world.servers = bundle.servers;
  world.users = bundle.users;
  world.services = bundle.services;
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(world.stations.begin(), world.stations.end(), by_id);
  std::sort(world.servers.begin(), world.servers.end(), by_id);
  std::sort(world.users.begin(), world.users.end(), by_id);
  std::sort(world.services.begin(), world.services.end(), by_id);
  world.rebuild_indexes();
  world.check_referential_integrity();
  return world;
}

IntervalContext make_context(const World& world, const DelayMatrix& matrix,
                             const ShortestPaths& paths, const SimConfig& config,
                             double t0_s, int interval) {
  IntervalContext ctx;
  ctx.interval = interval;
  ctx.matrix = &matrix;
  ctx.paths = &paths;
  const double t = t0_s + interval * config.interval_s;
  ctx.user_pos.reserve(world.users.size());
  ctx.user_station.reserve(world.users.size());
  ctx.user_station_m.reserve(world.users.size());
  for (const MobileUser& user : world.users) {
    const GeoPoint pos = user.trace.position_at(t);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const BaseStation& bs : world.stations) {
      const double d = distance_m(bs.location, pos);
      if (d < best_d || (d == best_d && best >= 0 && bs.id < best)) {
        best = bs.id;
        best_d = d;
      }
    }
    if (best_d > config.policy.distance_threshold_m) best = -1;  // out of radio range
    ctx.user_pos.push_back(pos);
    ctx.user_station.push_back(best);
    ctx.user_station_m.push_back(best_d);
  }
  return ctx;
}

namespace {

void validate_bundle(const World& world, const SimConfig& config, double t0_s) {
  const int P = config.horizon_intervals;
  if (P == 0) return;
  const double t_end = t0_s + (P - 1) * config.interval_s;
  for (const MobileUser& user : world.users) {
    if (user.trace.samples.empty())
      throw TraceError("user " + std::to_string(user.id) + " has an empty trace");
    if (user.trace.last_timestamp() < t_end)
      throw TraceError("trace underrun: user " + std::to_string(user.id) + " ends at " +
                       std::to_string(user.trace.last_timestamp()) + "s but the horizon needs " +
                       std::to_string(t_end) + "s");
  }
  for (const EdgeService& svc : world.services) {
    if (static_cast<int>(svc.workload_trace.size()) < P)
      throw TraceError("workload underrun: service " + std::to_string(svc.id) + " has " +
                       std::to_string(svc.workload_trace.size()) + " samples, horizon needs " +
                       std::to_string(P));
  }
}

}  // namespace

MetricsReport run(const TraceBundle& bundle, const SimConfig& config,
                  const std::string& policy_name, std::optional<std::uint64_t> policy_seed,
                  const MatrixProvider& matrix_provider) {
  config.validate();
  World world = make_world(bundle);

  double t0 = 0.0;
  if (!world.users.empty()) {
    t0 = std::numeric_limits<double>::infinity();
    for (const MobileUser& u : world.users)
      t0 = std::min(t0, u.trace.samples.empty() ? 0.0 : u.trace.first_timestamp());
    if (!std::isfinite(t0)) t0 = 0.0;
  }
  validate_bundle(world, config, t0);

  Rng engine_rng(derive_seed(config.rng_seed, {hash_str("engine")}));
  const std::uint64_t pseed =
      policy_seed.value_or(derive_seed(config.rng_seed, {hash_str("policy"), hash_str(policy_name)}));
  auto policy = make_policy(policy_name, pseed);

  MetricsReport report;
  report.policy = policy_name;

  double delay_sum_total = 0.0;
  long served_total = 0;

  for (int t = 0; t < config.horizon_intervals; ++t) {
    const DelayMatrix matrix = matrix_provider
                                   ? matrix_provider(world.stations, config, engine_rng, t)
                                   : regenerate_delay_matrix(world.stations, config, engine_rng, t);
    const ShortestPaths paths(matrix);
    const IntervalContext ctx = make_context(world, matrix, paths, config, t0, t);

    IntervalMetrics m;
    m.interval = t;

    // Unplaced services with reachable users request (re)placement.
    for (EdgeService& svc : world.services) {
      if (svc.current_server_id) continue;
      const int uidx = world.user_index.at(svc.user_id);
      if (ctx.user_station[uidx] < 0) continue;
      if (!policy->assign(world, ctx, config, svc.id, !svc.ever_placed)) ++m.placement_failures;
    }

    // Migration pass; downtime is charged to the interval a move commits.
    std::unordered_set<int> moved_cross_station;
    for (const MigrationEvent& ev : policy->migrate_pass(world, ctx, config)) {
      if (!ev.dest_server_id) {
        ++m.placement_failures;
        continue;
      }
      ++m.migrations;
      m.migration_cost_km += ev.cost_km;
      const int src_station = world.server(ev.source_server_id).base_station_id;
      const int dst_station = world.server(*ev.dest_server_id).base_station_id;
      if (migration_delay_ms(src_station, dst_station, config) > 0.0)
        moved_cross_station.insert(ev.service_id);
    }

    // Delay accounting. Users without any station in radio range suffer an
    // outage this interval and are charged the same penalty as unplaced
    // services, keeping both failure modes visible in the delay metric.
    double delay_sum = 0.0;
    const double penalty = config.failure_penalty_factor * config.policy.delay_threshold_ms;
    for (const MobileUser& user : world.users) {
      const int uidx = world.user_index.at(user.id);
      const EdgeService& svc = world.service(user.service_id);
      double delay;
      if (ctx.user_station[uidx] < 0 || !svc.current_server_id) {
        delay = penalty;
      } else {
        delay = service_delay_ms(world, ctx, config, svc);
        if (moved_cross_station.count(svc.id)) delay += config.migration_downtime_ms;
      }
      delay_sum += delay;
      ++m.served;
    }
    m.mean_delay_ms = m.served ? delay_sum / m.served : 0.0;
    delay_sum_total += delay_sum;
    served_total += m.served;

    // Scaled-up servers that lost all their services shut down and return to
    // the pool; the per-station baseline fleet stays on.
    for (EdgeServer& server : world.servers) {
      if (server.powered_on && server.hosted_service_ids.empty() && !world.is_primary(server))
        server.powered_on = false;
    }

    for (const EdgeServer& server : world.servers) {
      if (!server.powered_on) continue;
      if (server_cpu_utilization(server, world, t) > config.overload_threshold)
        ++m.overloaded_servers;
    }

    report.aggregate.total_migration_cost_km += m.migration_cost_km;
    report.per_interval.push_back(m);

    world.check_referential_integrity();
  }

  report.aggregate.overall_delay_ms = served_total ? delay_sum_total / served_total : 0.0;
  if (!report.per_interval.empty()) {
    double sum = 0.0;
    for (const IntervalMetrics& m : report.per_interval) sum += m.overloaded_servers;
    report.aggregate.mean_overloaded_servers = sum / report.per_interval.size();
  }
  return report;
}

std::map<std::string, MetricsReport> compare_policies(const TraceBundle& bundle,
                                                      const SimConfig& config,
                                                      const std::vector<std::string>& policies) {
  std::map<std::string, MetricsReport> out;
  for (const std::string& name : policies) {
    const std::uint64_t seed =
        derive_seed(config.rng_seed, {hash_str("policy"), hash_str(name)});
    out.emplace(name, run(bundle, config, name, seed));
  }
  return out;
}

void parallel_for_indexed(std::size_t n, const std::function<void(std::size_t)>& fn,
                          int max_workers) {
  if (n == 0) return;
  unsigned workers = max_workers > 0 ? static_cast<unsigned>(max_workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace mecsim
