#ifndef MECSIM_MODEL_HPP_
#define MECSIM_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mecsim/geo.hpp"

namespace mecsim {

// Raised for inconsistent configuration or world state (unknown ids,
// impossible parameters). Mapped to exit code 2 by the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised for trace ingestion problems (malformed rows, underruns).
// Mapped to exit code 3 by the CLI.
class TraceError : public std::runtime_error {
 public:
  explicit TraceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BaseStation {
  int id = -1;
  GeoPoint location;
  int edge_server_id = -1;  // the primary server attached to this station
};

struct EdgeServer {
  int id = -1;
  int base_station_id = -1;
  double capacity_mips = 0.0;
  double capacity_ram_bytes = 0.0;
  double capacity_storage_bytes = 0.0;
  std::set<int> hosted_service_ids;  // ordered: deterministic iteration
  bool powered_on = true;
};

// Timestamped positions; timestamps strictly increasing. Position between
// samples is the previous sample held (piecewise constant); before the first
// sample the first sample is used.
struct MobilityTrace {
  std::vector<std::pair<double, GeoPoint>> samples;  // (seconds, location)

  const GeoPoint& position_at(double t_s) const {
    if (samples.empty()) throw TraceError("position_at: empty trace");
    const GeoPoint* last = &samples.front().second;
    for (const auto& [ts, p] : samples) {
      if (ts > t_s) break;
      last = &p;
    }
    return *last;
  }

  double first_timestamp() const { return samples.front().first; }
  double last_timestamp() const { return samples.back().first; }
};

struct MobileUser {
  int id = -1;
  MobilityTrace trace;
  int service_id = -1;        // exactly one service per user
  double task_size_mi = 60.0; // millions of instructions per request
  double transmit_power_w = 0.5;
};

struct MigrationRecord {
  int interval = 0;
  int source_server_id = -1;
  int dest_server_id = -1;
  double cost_km = 0.0;  // distance between source and destination stations
};

struct EdgeService {
  int id = -1;
  int user_id = -1;
  double requested_mips = 0.0;
  double requested_ram_bytes = 0.0;
  std::vector<double> workload_trace;  // cpu-utilization fraction per interval
  std::optional<int> current_server_id;
  std::vector<MigrationRecord> migration_log;
  // Location the assignment algorithm measures candidate proximity against:
  // the user position for initial placement, the source station afterwards.
  GeoPoint location;
  bool ever_placed = false;
};

struct WirelessChannelParams {
  double bandwidth_hz = 20e6;    // W
  double noise_power_w = 2e-13;  // N_p
  double pathloss_a_db = 127.0;
  double pathloss_b_db_per_decade = 30.0;
};

struct PolicyParams {
  double assignment_shape_p = 1.0;    // p
  double assignment_threshold = 0.9;  // T
  double migration_shape_beta = 0.25; // beta
  double migration_threshold = 0.9;   // T_h
  double delay_threshold_ms = 75.0;   // T_d
  double distance_threshold_m = 1000.0;
};

struct SimConfig {
  double interval_s = 60.0;
  int horizon_intervals = 180;  // P
  double migration_downtime_ms = 50.0;  // M_c
  std::uint64_t rng_seed = 1;
  double overload_threshold = 0.9;
  double link_delay_min_ms = 5.0;
  double link_delay_max_ms = 50.0;
  int knn_k = 4;
  double bits_per_instruction = 8.0;   // request payload bits per task Mi unit
  double failure_penalty_factor = 10.0;  // penalty delay = factor * T_d
  double oversubscription_limit = 2.0;   // admission cap on requested MIPS
  WirelessChannelParams channel;
  PolicyParams policy;

  void validate() const {
    if (interval_s <= 0) throw ConfigError("interval_s must be > 0");
    if (horizon_intervals < 0) throw ConfigError("horizon_intervals must be >= 0");
    if (link_delay_min_ms > link_delay_max_ms)
      throw ConfigError("link_delay_min_ms must be <= link_delay_max_ms");
    if (policy.assignment_shape_p <= 0) throw ConfigError("assignment_shape_p must be > 0");
    if (policy.assignment_threshold <= 0 || policy.assignment_threshold > 1)
      throw ConfigError("assignment_threshold must be in (0, 1]");
    if (policy.migration_threshold <= 0 || policy.migration_threshold > 1)
      throw ConfigError("migration_threshold must be in (0, 1]");
    if (policy.migration_shape_beta <= 0) throw ConfigError("migration_shape_beta must be > 0");
    if (policy.delay_threshold_ms <= 0) throw ConfigError("delay_threshold_ms must be > 0");
    if (channel.bandwidth_hz <= 0 || channel.noise_power_w <= 0)
      throw ConfigError("channel parameters must be strictly positive");
    if (oversubscription_limit <= 0) throw ConfigError("oversubscription_limit must be > 0");
  }
};

// Inputs of the competitive-ratio bound. epsilon and delta are the processing
// and migration cost terms with the connection cost normalized to 1.
struct CompetitiveParams {
  int servers = 1;   // J
  int services = 1;  // R
  double epsilon = 0.0;
  double delta = 0.0;
};

// Full simulation state: entity vectors plus id -> index lookups. Owned and
// mutated by the engine only; policies receive it by reference during their
// serialized calls.
struct World {
  std::vector<BaseStation> stations;
  std::vector<EdgeServer> servers;
  std::vector<MobileUser> users;
  std::vector<EdgeService> services;

  std::unordered_map<int, int> station_index;
  std::unordered_map<int, int> server_index;
  std::unordered_map<int, int> user_index;
  std::unordered_map<int, int> service_index;

  void rebuild_indexes();

  const BaseStation& station(int id) const { return stations[index_of(station_index, id, "station")]; }
  const EdgeServer& server(int id) const { return servers[index_of(server_index, id, "server")]; }
  EdgeServer& server(int id) { return servers[index_of(server_index, id, "server")]; }
  const MobileUser& user(int id) const { return users[index_of(user_index, id, "user")]; }
  const EdgeService& service(int id) const { return services[index_of(service_index, id, "service")]; }
  EdgeService& service(int id) { return services[index_of(service_index, id, "service")]; }

  const BaseStation& station_of_server(int server_id) const {
    return station(server(server_id).base_station_id);
  }

  // Primary servers are the one-per-station baseline fleet; everything else
  // belongs to the scale-up pool.
  bool is_primary(const EdgeServer& s) const {
    return station(s.base_station_id).edge_server_id == s.id;
  }

  // Sum of requested MIPS currently hosted on the server.
  double requested_mips_on(const EdgeServer& s) const;

  // Admission check against the oversubscription cap on requested MIPS.
  bool admissible(const EdgeServer& s, const EdgeService& svc,
                  double oversubscription_limit) const {
    return requested_mips_on(s) + svc.requested_mips <=
           s.capacity_mips * oversubscription_limit;
  }

  // Placement mutations keep hosted sets and current_server_id in sync and
  // preserve "service on at most one server".
  void place(int service_id, int server_id);
  void deallocate(int service_id);

  // Throws ConfigError on any dangling reference or double placement.
  void check_referential_integrity() const;

 private:
  static int index_of(const std::unordered_map<int, int>& m, int id, const char* kind) {
    auto it = m.find(id);
    if (it == m.end())
      throw ConfigError(std::string("unknown ") + kind + " id " + std::to_string(id));
    return it->second;
  }
};

// CPU utilization of a server at an interval: sum over hosted services of
// workload_trace[interval] * requested_mips / capacity_mips, clamped to
// [0, 1.5]. Values above 1 indicate oversubscription.
double server_cpu_utilization(const EdgeServer& server, const World& world, int interval);

}  // namespace mecsim

#endif  // MECSIM_MODEL_HPP_
