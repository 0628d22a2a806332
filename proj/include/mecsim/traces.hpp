#ifndef MECSIM_TRACES_HPP_
#define MECSIM_TRACES_HPP_

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mecsim/model.hpp"

namespace mecsim {

// Everything a simulation run consumes: stations with their servers (primary
// plus powered-off spares), users with mobility traces, and one service per
// user carrying its workload trace. All traces are aligned to the scheduling
// interval grid.
struct TraceBundle {
  std::vector<BaseStation> stations;
  std::vector<EdgeServer> servers;
  std::vector<MobileUser> users;
  std::vector<EdgeService> services;
};

// Parameters of the synthetic world generator: a square study area with
// uniformly placed stations, random-waypoint users, and bounded-random-walk
// workload traces. Fully determined by `seed`.
struct WorldGenParams {
  int stations = 147;
  int users = 1000;
  GeoPoint center = {37.7749, -122.4194};
  double half_side_m = 2000.0;
  std::vector<double> server_mips = {16000.0, 24000.0, 32000.0};  // 8 cores x {2,3,4}k
  double server_ram_gb = 80.0;
  double server_storage_tb = 10.0;
  std::vector<double> service_mips = {1000.0, 1500.0, 2000.0, 2500.0};
  double service_ram_gb = 8.0;
  double task_size_mi = 60.0;
  double transmit_power_w = 0.5;
  // Stationary background subscribers pre-placed on each station's primary
  // server; their demand is a fraction of that server's capacity.
  int residents_per_station = 2;
  double resident_demand_frac = 0.1;
  int spares_per_station = 1;
  int horizon_intervals = 180;
  double interval_s = 60.0;
  double speed_min_mps = 1.0;
  double speed_max_mps = 8.0;
  // City driving is tortuous: waypoints are drawn near the current position
  // and vehicles pause at them (passenger stops, lights, stands).
  double waypoint_range_m = 250.0;
  int pause_max_intervals = 5;
  // Uniform per-sample position noise, mimicking raw (un-map-matched) GPS.
  double gps_noise_m = 60.0;
  double workload_start_min = 0.75;
  double workload_start_max = 1.0;
  double workload_step = 0.08;
  int workload_multiplier = 1;  // co-deployed service bundling
  std::uint64_t seed = 1;
};

// `id,lat,lng` rows, UTF-8, optional header (detected by a non-numeric first
// field). Produces one station and one co-located primary server per row;
// server capacities cycle through `server_mips`. Errors carry line numbers.
std::pair<std::vector<BaseStation>, std::vector<EdgeServer>> load_station_csv(
    const std::string& path,
    const std::vector<double>& server_mips = {16000.0, 24000.0, 32000.0});

// `taxi_id,lat,lng,occupancy,timestamp` rows (occupancy ignored), optional
// header. One trace per taxi, sorted by timestamp; duplicate timestamps keep
// the first sample.
std::vector<std::pair<int, MobilityTrace>> load_mobility_csv(const std::string& path);

// Writers for the two formats above; loaders are lossless for well-formed
// files (load -> write -> load is the identity).
void write_station_csv(const std::string& path, const std::vector<BaseStation>& stations);
void write_mobility_csv(const std::string& path,
                        const std::vector<std::pair<int, MobilityTrace>>& traces);

TraceBundle synth_world(const WorldGenParams& params);

// Builds users/services (synthetic workloads, round-robin demand sizes) on
// top of externally loaded stations and mobility traces.
TraceBundle assemble_bundle(std::vector<BaseStation> stations, std::vector<EdgeServer> servers,
                            const std::vector<std::pair<int, MobilityTrace>>& traces,
                            const WorldGenParams& params);

// Scales every service's requested MIPS by `multiplier`, modeling bundles of
// co-deployed services; utilization traces are unchanged.
TraceBundle densify_workloads(TraceBundle bundle, int multiplier);

struct RushHourSelection {
  GeoPoint center;
  double half_side_m = 2000.0;
  std::set<int> station_ids;
  std::set<int> user_ids;
  int window_start_interval = 0;
  int window_end_interval = 0;
  double window_start_s = 0.0;
};

// Plain Lloyd's k-means over 2D points (meters), k-means++ seeded from
// `seed`, at most `max_iters` iterations, convergence when no centroid moves
// more than `tol`. Exposed for direct testing of the clustering step.
struct KMeansResult {
  std::vector<std::pair<double, double>> centers;
  std::vector<int> assignment;
  std::vector<double> wcss_history;  // within-cluster sum of squares per iteration
};
KMeansResult kmeans(const std::vector<std::pair<double, double>>& points, int k,
                    std::uint64_t seed, int max_iters = 100, double tol = 1e-6);

// Clusters all trace points, centers a square of side 2*half_side_m on the
// most populous cluster's centroid, selects the stations inside it and the
// contiguous window of `window_s` seconds with the most distinct users
// inside the square.
RushHourSelection kmeans_rush_hour(const std::vector<std::pair<int, MobilityTrace>>& traces,
                                   int k, const std::vector<BaseStation>& stations,
                                   std::uint64_t seed, double half_side_m = 2000.0,
                                   double window_s = 3.0 * 3600.0, double interval_s = 60.0);

// Restricts a bundle to the selection: keeps selected stations (with their
// servers) and selected users, and re-bases trace timestamps to the window
// start.
TraceBundle extract_rush_hour(const TraceBundle& bundle, const RushHourSelection& selection);

}  // namespace mecsim

#endif  // MECSIM_TRACES_HPP_
