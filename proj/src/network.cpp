#include "mecsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mecsim {

DelayMatrix::DelayMatrix(int interval, std::vector<int> station_ids,
                         std::vector<double> delays_ms)
    : interval_(interval), station_ids_(std::move(station_ids)), delays_ms_(std::move(delays_ms)) {
  const std::size_t n = station_ids_.size();
  if (delays_ms_.size() != n * n)
    throw ConfigError("delay matrix size does not match station count");
  for (std::size_t i = 0; i < n; ++i) index_.emplace(station_ids_[i], static_cast<int>(i));
}

namespace {

// Union-find over matrix indices, for the connectivity check.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<bool> knn_adjacency(const std::vector<BaseStation>& stations, int k) {
  const int n = static_cast<int>(stations.size());
  std::vector<bool> adj(static_cast<std::size_t>(n) * n, false);
  std::vector<std::pair<double, int>> dists(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      dists[j] = {distance_m(stations[i].location, stations[j].location), j};
    std::sort(dists.begin(), dists.end());
    int taken = 0;
    for (const auto& [d, j] : dists) {
      if (j == i) continue;
      adj[static_cast<std::size_t>(i) * n + j] = true;
      adj[static_cast<std::size_t>(j) * n + i] = true;
      if (++taken == k) break;
    }
  }
  return adj;
}

bool is_connected(const std::vector<bool>& adj, int n) {
  DisjointSet ds(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adj[static_cast<std::size_t>(i) * n + j]) ds.unite(i, j);
  const int root = ds.find(0);
  for (int i = 1; i < n; ++i)
    if (ds.find(i) != root) return false;
  return true;
}

}  // namespace

DelayMatrix regenerate_delay_matrix(const std::vector<BaseStation>& stations,
                                    const SimConfig& config, Rng& rng, int interval) {
  const int n = static_cast<int>(stations.size());
  if (n < 1) throw ConfigError("delay matrix needs at least one station");

  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = stations[i].id;

  if (n == 1) return DelayMatrix(interval, ids, {0.0});

  if (config.knn_k >= n)
    throw ConfigError("knn_k (" + std::to_string(config.knn_k) +
                      ") must be smaller than the station count (" + std::to_string(n) + ")");
  if (config.knn_k < 1) throw ConfigError("knn_k must be >= 1");

  int k = config.knn_k;
  std::vector<bool> adj = knn_adjacency(stations, k);
  while (!is_connected(adj, n) && k < n - 1) adj = knn_adjacency(stations, ++k);

  std::vector<double> delays(static_cast<std::size_t>(n) * n, DelayMatrix::absent());
  for (int i = 0; i < n; ++i) delays[static_cast<std::size_t>(i) * n + i] = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!adj[static_cast<std::size_t>(i) * n + j]) continue;
      const double d = rng.uniform(config.link_delay_min_ms, config.link_delay_max_ms);
      delays[static_cast<std::size_t>(i) * n + j] = d;
      delays[static_cast<std::size_t>(j) * n + i] = d;
    }
  }
  return DelayMatrix(interval, std::move(ids), std::move(delays));
}

ShortestPaths::ShortestPaths(const DelayMatrix& matrix) : matrix_(&matrix) {
  const int n = matrix.node_count();
  adjacency_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = matrix.direct_delay_at(i, j);
      if (i != j && std::isfinite(w)) adjacency_[i].emplace_back(j, w);
    }
  }
}

const std::vector<double>& ShortestPaths::from(int from_station) const {
  auto it = cache_.find(from_station);
  if (it != cache_.end()) return it->second;

  const int n = matrix_->node_count();
  const int src = matrix_->index_of(from_station);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  dist[src] = 0.0;

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.emplace(0.0, src);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adjacency_[u]) {
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return cache_.emplace(from_station, std::move(dist)).first->second;
}

double ShortestPaths::delay_ms(int from_station, int to_station) const {
  if (from_station == to_station) return 0.0;
  const double d = from(from_station)[matrix_->index_of(to_station)];
  if (!std::isfinite(d))
    throw ConfigError("station " + std::to_string(to_station) + " unreachable from " +
                      std::to_string(from_station));
  return d;
}

double forwarding_delay(const DelayMatrix& matrix, int from_station, int to_station) {
  return ShortestPaths(matrix).delay_ms(from_station, to_station);
}

double transmission_rate_bps(const WirelessChannelParams& channel, double transmit_power_w,
                             double distance_m) {
  if (distance_m <= 0.0) distance_m = 1.0;  // co-located user
  const double gain_db =
      channel.pathloss_a_db + channel.pathloss_b_db_per_decade * std::log10(distance_m / 1000.0);
  const double gain_linear = std::pow(10.0, gain_db / 10.0);
  return channel.bandwidth_hz *
         std::log2(1.0 + transmit_power_w / (gain_linear * channel.noise_power_w));
}

double communication_delay_ms(const MobileUser& user, double user_to_station_m,
                              int current_station, int serving_station,
                              const ShortestPaths& paths, const WirelessChannelParams& channel,
                              double bits_per_instruction) {
  const double rate = transmission_rate_bps(channel, user.transmit_power_w, user_to_station_m);
  const double bits = user.task_size_mi * bits_per_instruction;
  const double uplink_ms = bits / rate * 1000.0;
  return uplink_ms + paths.delay_ms(current_station, serving_station);
}

double computation_delay_ms(double task_size_mi, double requested_mips,
                            double total_requested_mips, double capacity_mips) {
  double share = requested_mips;
  if (total_requested_mips > capacity_mips && total_requested_mips > 0.0)
    share = requested_mips * capacity_mips / total_requested_mips;
  if (share <= 0.0) throw ConfigError("service has no allocated MIPS");
  return task_size_mi / share * 1000.0;
}

double migration_delay_ms(int source_station, int dest_station, const SimConfig& config) {
  return source_station == dest_station ? 0.0 : config.migration_downtime_ms;
}

double migration_cost_km(int source_server_id, int dest_server_id, const World& world) {
  if (source_server_id == dest_server_id)
    throw ConfigError("migration cost requires distinct source and destination");
  const BaseStation& src = world.station_of_server(source_server_id);
  const BaseStation& dst = world.station_of_server(dest_server_id);
  return distance_km(src.location, dst.location);
}

}  // namespace mecsim
