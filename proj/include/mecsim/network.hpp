#ifndef MECSIM_NETWORK_HPP_
#define MECSIM_NETWORK_HPP_

#include <limits>
#include <unordered_map>
#include <vector>

#include "mecsim/model.hpp"
#include "mecsim/rng.hpp"

namespace mecsim {

// Per-interval inter-station link delays. Entries are milliseconds; absent
// links (not directly connected) are +infinity. Symmetric, zero diagonal,
// and the induced graph is connected.
class DelayMatrix {
 public:
  DelayMatrix() = default;
  DelayMatrix(int interval, std::vector<int> station_ids, std::vector<double> delays_ms);

  int interval() const { return interval_; }
  int node_count() const { return static_cast<int>(station_ids_.size()); }
  const std::vector<int>& station_ids() const { return station_ids_; }

  double direct_delay_ms(int from_station, int to_station) const {
    return delays_ms_[idx(from_station) * node_count() + idx(to_station)];
  }
  double direct_delay_at(int i, int j) const { return delays_ms_[i * node_count() + j]; }

  bool connected(int from_station, int to_station) const {
    return std::isfinite(direct_delay_ms(from_station, to_station));
  }

  int index_of(int station_id) const { return idx(station_id); }

  static constexpr double absent() { return std::numeric_limits<double>::infinity(); }

 private:
  int idx(int station_id) const {
    auto it = index_.find(station_id);
    if (it == index_.end())
      throw ConfigError("station id " + std::to_string(station_id) + " not in delay matrix");
    return it->second;
  }

  int interval_ = 0;
  std::vector<int> station_ids_;
  std::vector<double> delays_ms_;  // row-major, node_count^2
  std::unordered_map<int, int> index_;
};

// Draws each present link delay uniformly from [link_delay_min_ms,
// link_delay_max_ms]. Connectivity is the symmetrized union of each node's k
// nearest neighbors (k = config.knn_k); if that graph is disconnected the
// neighborhood size is grown and the graph rebuilt until connected (station
// positions are fixed, so retrying the draw alone could never reconnect it).
// A single station yields the trivial 1x1 matrix; otherwise k >= L is a
// configuration error.
DelayMatrix regenerate_delay_matrix(const std::vector<BaseStation>& stations,
                                    const SimConfig& config, Rng& rng, int interval = 0);

// Exact single-source shortest-path forwarding delay over direct links:
// Dijkstra on the adjacency lists, memoized per source. One instance serves
// one matrix; the engine rebuilds it each interval.
class ShortestPaths {
 public:
  explicit ShortestPaths(const DelayMatrix& matrix);

  double delay_ms(int from_station, int to_station) const;

  // Distances from one source to every node, by matrix index.
  const std::vector<double>& from(int from_station) const;

 private:
  const DelayMatrix* matrix_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
  mutable std::unordered_map<int, std::vector<double>> cache_;
};

// One-shot convenience: shortest-path delay between two stations.
// Unreachable nodes throw (impossible while the connectivity invariant holds).
double forwarding_delay(const DelayMatrix& matrix, int from_station, int to_station);

// Shannon-capacity uplink rate in bits/second. The channel gain
// pathloss_a_db + pathloss_b_db_per_decade * log10(d_km) is a path loss in
// dB, converted to linear before use. Non-positive distances are clamped to
// 1 m (co-located user).
double transmission_rate_bps(const WirelessChannelParams& channel, double transmit_power_w,
                             double distance_m);

// Uplink transfer time plus forwarding delay from the current station to the
// serving station, in ms. The request payload is task_size_mi *
// bits_per_instruction bits.
double communication_delay_ms(const MobileUser& user, double user_to_station_m,
                              int current_station, int serving_station,
                              const ShortestPaths& paths, const WirelessChannelParams& channel,
                              double bits_per_instruction);

// Execution time of one request, in ms. The MIPS share w is the requested
// rate while total requests fit the capacity, degraded proportionally
// (requested * capacity / total_requested) otherwise.
double computation_delay_ms(double task_size_mi, double requested_mips,
                            double total_requested_mips, double capacity_mips);

// Service downtime: zero when source and destination stations coincide,
// config.migration_downtime_ms otherwise.
double migration_delay_ms(int source_station, int dest_station, const SimConfig& config);

// Distance between the source and destination servers' stations, in km.
double migration_cost_km(int source_server_id, int dest_server_id, const World& world);

}  // namespace mecsim

#endif  // MECSIM_NETWORK_HPP_
