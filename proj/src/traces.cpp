#include "mecsim/traces.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "mecsim/rng.hpp"

namespace mecsim {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return fields;
}

bool is_numeric(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

double parse_double(const std::string& s, const std::string& path, int line_no,
                    const char* what) {
  if (!is_numeric(s))
    throw TraceError(path + ":" + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  return std::strtod(s.c_str(), nullptr);
}

int parse_int(const std::string& s, const std::string& path, int line_no, const char* what) {
  const double v = parse_double(s, path, line_no, what);
  if (v != std::floor(v))
    throw TraceError(path + ":" + std::to_string(line_no) + ": non-integer " + what);
  return static_cast<int>(v);
}

constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;
constexpr double kTiB = kGiB * 1024.0;

EdgeServer make_server(int id, int station_id, double mips, double ram_gb, double storage_tb,
                       bool powered_on) {
  EdgeServer s;
  s.id = id;
  s.base_station_id = station_id;
  s.capacity_mips = mips;
  s.capacity_ram_bytes = ram_gb * kGiB;
  s.capacity_storage_bytes = storage_tb * kTiB;
  s.powered_on = powered_on;
  return s;
}

double bounded_walk_step(double w, double step, Rng& rng) {
  w += rng.uniform(-step, step);
  if (w < 0.05) w = 0.05 + (0.05 - w);
  if (w > 1.0) w = 1.0 - (w - 1.0);
  return std::clamp(w, 0.05, 1.0);
}

// Stationary background subscribers, one service each, pre-placed on their
// station's primary server.
void add_residents(TraceBundle& bundle, const WorldGenParams& params, Rng& rng) {
  if (params.residents_per_station <= 0) return;
  int next_id = 0;
  for (const MobileUser& u : bundle.users) next_id = std::max(next_id, u.id + 1);
  for (const EdgeService& s : bundle.services) next_id = std::max(next_id, s.id + 1);

  const double horizon_s = (params.horizon_intervals - 1) * params.interval_s;
  for (const BaseStation& bs : bundle.stations) {
    EdgeServer* primary = nullptr;
    for (EdgeServer& s : bundle.servers)
      if (s.id == bs.edge_server_id) primary = &s;
    if (!primary) continue;
    for (int k = 0; k < params.residents_per_station; ++k) {
      MobileUser user;
      user.id = next_id;
      user.service_id = next_id;
      user.task_size_mi = params.task_size_mi;
      user.transmit_power_w = params.transmit_power_w;
      user.trace.samples = {{0.0, bs.location}};
      if (horizon_s > 0.0) user.trace.samples.emplace_back(horizon_s, bs.location);

      EdgeService svc;
      svc.id = next_id;
      svc.user_id = next_id;
      svc.requested_mips =
          primary->capacity_mips * params.resident_demand_frac * params.workload_multiplier;
      svc.requested_ram_bytes = params.service_ram_gb * kGiB;
      double w = rng.uniform(params.workload_start_min, params.workload_start_max);
      for (int t = 0; t < params.horizon_intervals; ++t) {
        svc.workload_trace.push_back(w);
        w = bounded_walk_step(w, params.workload_step, rng);
      }
      svc.current_server_id = primary->id;
      svc.ever_placed = true;
      svc.location = bs.location;
      primary->hosted_service_ids.insert(svc.id);

      bundle.users.push_back(std::move(user));
      bundle.services.push_back(std::move(svc));
      ++next_id;
    }
  }
}

}  // namespace

std::pair<std::vector<BaseStation>, std::vector<EdgeServer>> load_station_csv(
    const std::string& path, const std::vector<double>& server_mips) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open station file: " + path);

  std::vector<BaseStation> stations;
  std::vector<EdgeServer> servers;
  std::set<int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (line_no == 1 && !fields.empty() && !is_numeric(fields[0])) continue;  // header
    if (fields.size() != 3)
      throw TraceError(path + ":" + std::to_string(line_no) + ": expected 3 fields (id,lat,lng)");
    BaseStation bs;
    bs.id = parse_int(fields[0], path, line_no, "station id");
    bs.location.lat = parse_double(fields[1], path, line_no, "latitude");
    bs.location.lng = parse_double(fields[2], path, line_no, "longitude");
    if (bs.location.lat < -90 || bs.location.lat > 90 || bs.location.lng < -180 ||
        bs.location.lng > 180)
      throw TraceError(path + ":" + std::to_string(line_no) + ": coordinates out of range");
    if (!seen.insert(bs.id).second)
      throw TraceError(path + ":" + std::to_string(line_no) + ": duplicate station id " +
                       std::to_string(bs.id));
    bs.edge_server_id = bs.id;
    servers.push_back(make_server(bs.id, bs.id,
                                  server_mips[stations.size() % server_mips.size()], 80.0, 10.0,
                                  true));
    stations.push_back(bs);
  }
  if (stations.empty()) throw TraceError(path + ": empty dataset");
  return {std::move(stations), std::move(servers)};
}

std::vector<std::pair<int, MobilityTrace>> load_mobility_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open mobility file: " + path);

  std::map<int, std::vector<std::pair<double, GeoPoint>>> by_taxi;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (line_no == 1 && !fields.empty() && !is_numeric(fields[0])) continue;  // header
    if (fields.size() != 5)
      throw TraceError(path + ":" + std::to_string(line_no) +
                       ": expected 5 fields (taxi_id,lat,lng,occupancy,timestamp)");
    const int taxi = parse_int(fields[0], path, line_no, "taxi id");
    GeoPoint p;
    p.lat = parse_double(fields[1], path, line_no, "latitude");
    p.lng = parse_double(fields[2], path, line_no, "longitude");
    const double ts = parse_double(fields[4], path, line_no, "timestamp");
    by_taxi[taxi].emplace_back(ts, p);
  }
  if (by_taxi.empty()) throw TraceError(path + ": empty dataset");

  std::vector<std::pair<int, MobilityTrace>> out;
  out.reserve(by_taxi.size());
  for (auto& [taxi, samples] : by_taxi) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    MobilityTrace trace;
    for (const auto& s : samples) {
      if (!trace.samples.empty() && trace.samples.back().first == s.first) {
        const GeoPoint& prev = trace.samples.back().second;
        if (prev.lat != s.second.lat || prev.lng != s.second.lng)
          std::cerr << "warning: taxi " << taxi << " has conflicting samples at t=" << s.first
                    << "; keeping the first\n";
        continue;
      }
      trace.samples.push_back(s);
    }
    out.emplace_back(taxi, std::move(trace));
  }
  return out;
}

void write_station_csv(const std::string& path, const std::vector<BaseStation>& stations) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write station file: " + path);
  out << "id,lat,lng\n";
  out.precision(17);
  for (const BaseStation& bs : stations)
    out << bs.id << ',' << bs.location.lat << ',' << bs.location.lng << '\n';
}

void write_mobility_csv(const std::string& path,
                        const std::vector<std::pair<int, MobilityTrace>>& traces) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write mobility file: " + path);
  out << "taxi_id,lat,lng,occupancy,timestamp\n";
  out.precision(17);
  for (const auto& [taxi, trace] : traces)
    for (const auto& [ts, p] : trace.samples)
      out << taxi << ',' << p.lat << ',' << p.lng << ",0," << ts << '\n';
}

TraceBundle synth_world(const WorldGenParams& params) {
  if (params.stations < 1) throw ConfigError("synth_world: need at least one station");
  if (params.users < 1) throw ConfigError("synth_world: need at least one user");
  if (params.horizon_intervals < 1) throw ConfigError("synth_world: empty horizon");

  Rng rng(params.seed);
  TraceBundle bundle;
  const double h = params.half_side_m;

  for (int i = 0; i < params.stations; ++i) {
    BaseStation bs;
    bs.id = i;
    bs.location = offset_m(params.center, rng.uniform(-h, h), rng.uniform(-h, h));
    bs.edge_server_id = i;
    bundle.stations.push_back(bs);
    bundle.servers.push_back(make_server(
        i, i, params.server_mips[i % params.server_mips.size()], params.server_ram_gb,
        params.server_storage_tb, true));
  }
  // Powered-off spares, round-robin over stations, for the scale-up pool.
  int next_server_id = params.stations;
  for (int s = 0; s < params.spares_per_station; ++s) {
    for (int i = 0; i < params.stations; ++i) {
      bundle.servers.push_back(make_server(
          next_server_id, i, params.server_mips[next_server_id % params.server_mips.size()],
          params.server_ram_gb, params.server_storage_tb, false));
      ++next_server_id;
    }
  }

  for (int u = 0; u < params.users; ++u) {
    MobileUser user;
    user.id = u;
    user.service_id = u;
    user.task_size_mi = params.task_size_mi;
    user.transmit_power_w = params.transmit_power_w;

    // Local random-waypoint motion with pauses, sampled on the interval
    // grid: each leg targets a point within waypoint_range_m of the current
    // position, and the vehicle may idle a few intervals on arrival.
    double east = rng.uniform(-h, h);
    double north = rng.uniform(-h, h);
    double wp_east = east, wp_north = north;
    double speed = 0.0;
    int pause = 0;
    const double r = params.waypoint_range_m;
    const double noise = params.gps_noise_m;
    for (int t = 0; t < params.horizon_intervals; ++t) {
      const double jitter_e = std::clamp(east + rng.uniform(-noise, noise), -h, h);
      const double jitter_n = std::clamp(north + rng.uniform(-noise, noise), -h, h);
      user.trace.samples.emplace_back(t * params.interval_s,
                                      offset_m(params.center, jitter_e, jitter_n));
      if (pause > 0) {
        --pause;
        continue;
      }
      double remaining = std::hypot(wp_east - east, wp_north - north);
      double budget = 0.0;  // travel budget for this step, fetched lazily
      while (true) {
        if (remaining <= 1e-9) {
          wp_east = std::clamp(east + rng.uniform(-r, r), -h, h);
          wp_north = std::clamp(north + rng.uniform(-r, r), -h, h);
          speed = rng.uniform(params.speed_min_mps, params.speed_max_mps);
          if (params.pause_max_intervals > 0)
            pause = static_cast<int>(
                rng.uniform_int(static_cast<std::uint64_t>(params.pause_max_intervals) + 1));
          remaining = std::hypot(wp_east - east, wp_north - north);
          if (pause > 0) break;
          continue;
        }
        if (budget == 0.0) budget = speed * params.interval_s;
        const double step = std::min(budget, remaining);
        const double frac = step / remaining;
        east += (wp_east - east) * frac;
        north += (wp_north - north) * frac;
        budget -= step;
        remaining = std::hypot(wp_east - east, wp_north - north);
        if (budget <= 1e-9) break;
      }
    }

    EdgeService svc;
    svc.id = u;
    svc.user_id = u;
    svc.requested_mips =
        params.service_mips[rng.uniform_int(params.service_mips.size())] *
        params.workload_multiplier;
    svc.requested_ram_bytes = params.service_ram_gb * kGiB;
    double w = rng.uniform(params.workload_start_min, params.workload_start_max);
    for (int t = 0; t < params.horizon_intervals; ++t) {
      svc.workload_trace.push_back(w);
      w = bounded_walk_step(w, params.workload_step, rng);
    }
    bundle.users.push_back(std::move(user));
    bundle.services.push_back(std::move(svc));
  }

  add_residents(bundle, params, rng);
  return bundle;
}

TraceBundle assemble_bundle(std::vector<BaseStation> stations, std::vector<EdgeServer> servers,
                            const std::vector<std::pair<int, MobilityTrace>>& traces,
                            const WorldGenParams& params) {
  if (traces.empty()) throw TraceError("assemble_bundle: no mobility traces");
  TraceBundle bundle;
  bundle.stations = std::move(stations);
  bundle.servers = std::move(servers);

  // Spares for the scale-up pool, ids continuing after the loaded servers.
  int next_server_id = 0;
  for (const EdgeServer& s : bundle.servers) next_server_id = std::max(next_server_id, s.id + 1);
  for (int r = 0; r < params.spares_per_station; ++r) {
    for (const BaseStation& bs : bundle.stations) {
      bundle.servers.push_back(make_server(
          next_server_id, bs.id, params.server_mips[next_server_id % params.server_mips.size()],
          params.server_ram_gb, params.server_storage_tb, false));
      ++next_server_id;
    }
  }

  Rng rng(params.seed);
  int idx = 0;
  for (const auto& [taxi, trace] : traces) {
    MobileUser user;
    user.id = taxi;
    user.service_id = taxi;
    user.task_size_mi = params.task_size_mi;
    user.transmit_power_w = params.transmit_power_w;
    user.trace = trace;

    EdgeService svc;
    svc.id = taxi;
    svc.user_id = taxi;
    // Round-robin demand sizes; workload walk drawn per service.
    svc.requested_mips = params.service_mips[idx % params.service_mips.size()] *
                         params.workload_multiplier;
    svc.requested_ram_bytes = params.service_ram_gb * kGiB;
    double w = rng.uniform(params.workload_start_min, params.workload_start_max);
    for (int t = 0; t < params.horizon_intervals; ++t) {
      svc.workload_trace.push_back(w);
      w = bounded_walk_step(w, params.workload_step, rng);
    }
    bundle.users.push_back(std::move(user));
    bundle.services.push_back(std::move(svc));
    ++idx;
  }
  return bundle;
}

TraceBundle densify_workloads(TraceBundle bundle, int multiplier) {
  if (multiplier < 1) throw ConfigError("densify_workloads: multiplier must be >= 1");
  for (EdgeService& svc : bundle.services) svc.requested_mips *= multiplier;
  return bundle;
}

KMeansResult kmeans(const std::vector<std::pair<double, double>>& points, int k,
                    std::uint64_t seed, int max_iters, double tol) {
  const int n = static_cast<int>(points.size());
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (n < k) throw ConfigError("kmeans: fewer points than clusters");

  Rng rng(seed);
  KMeansResult result;
  auto sqdist = [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
    const double dx = a.first - b.first;
    const double dy = a.second - b.second;
    return dx * dx + dy * dy;
  };

  // k-means++ seeding.
  result.centers.push_back(points[rng.uniform_int(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(result.centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : result.centers) best = std::min(best, sqdist(points[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      result.centers.push_back(points[rng.uniform_int(n)]);  // degenerate: all points coincide
      continue;
    }
    double target = rng.uniform01() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      target -= d2[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    result.centers.push_back(points[pick]);
  }

  result.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    double wcss = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sqdist(points[i], result.centers[c]);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      result.assignment[i] = best_c;
      wcss += best;
    }
    result.wcss_history.push_back(wcss);

    std::vector<double> sx(k, 0.0), sy(k, 0.0);
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sx[result.assignment[i]] += points[i].first;
      sy[result.assignment[i]] += points[i].second;
      ++count[result.assignment[i]];
    }
    double moved = 0.0;
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its center
      const std::pair<double, double> nc = {sx[c] / count[c], sy[c] / count[c]};
      moved = std::max(moved, std::sqrt(sqdist(nc, result.centers[c])));
      result.centers[c] = nc;
    }
    if (moved <= tol) break;
  }
  return result;
}

RushHourSelection kmeans_rush_hour(const std::vector<std::pair<int, MobilityTrace>>& traces,
                                   int k, const std::vector<BaseStation>& stations,
                                   std::uint64_t seed, double half_side_m, double window_s,
                                   double interval_s) {
  if (traces.empty()) throw TraceError("kmeans_rush_hour: no traces");

  // Project all samples to meters around the dataset centroid.
  GeoPoint origin{0.0, 0.0};
  std::size_t total = 0;
  for (const auto& [id, trace] : traces) {
    for (const auto& [ts, p] : trace.samples) {
      origin.lat += p.lat;
      origin.lng += p.lng;
      ++total;
    }
  }
  if (total == 0) throw TraceError("kmeans_rush_hour: traces have no samples");
  origin.lat /= static_cast<double>(total);
  origin.lng /= static_cast<double>(total);

  const double mlat = kEarthRadiusM * kDegToRad;
  const double mlng = mlat * std::cos(origin.lat * kDegToRad);
  auto project = [&](const GeoPoint& p) -> std::pair<double, double> {
    return {(p.lng - origin.lng) * mlng, (p.lat - origin.lat) * mlat};
  };

  std::vector<std::pair<double, double>> points;
  points.reserve(total);
  for (const auto& [id, trace] : traces)
    for (const auto& [ts, p] : trace.samples) points.push_back(project(p));

  const KMeansResult km = kmeans(points, k, seed);

  std::vector<int> population(k, 0);
  for (int a : km.assignment) ++population[a];
  const int densest = static_cast<int>(
      std::max_element(population.begin(), population.end()) - population.begin());

  RushHourSelection sel;
  sel.half_side_m = half_side_m;
  sel.center = offset_m(origin, km.centers[densest].first, km.centers[densest].second);

  auto inside = [&](const GeoPoint& p) {
    const auto [x, y] = project(p);
    return std::abs(x - km.centers[densest].first) <= half_side_m &&
           std::abs(y - km.centers[densest].second) <= half_side_m;
  };

  for (const BaseStation& bs : stations)
    if (inside(bs.location)) sel.station_ids.insert(bs.id);

  // Slide the window over the covered time span and keep the start with the
  // most distinct users inside the square (earliest on ties).
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = -std::numeric_limits<double>::infinity();
  for (const auto& [id, trace] : traces) {
    if (trace.samples.empty()) continue;
    t_min = std::min(t_min, trace.first_timestamp());
    t_max = std::max(t_max, trace.last_timestamp());
  }
  const double last_start = std::max(t_min, t_max - window_s);
  double best_start = t_min;
  int best_count = -1;
  for (double start = t_min; start <= last_start + 1e-9; start += interval_s) {
    int count = 0;
    for (const auto& [id, trace] : traces) {
      for (const auto& [ts, p] : trace.samples) {
        if (ts < start || ts >= start + window_s) continue;
        if (inside(p)) {
          ++count;
          break;
        }
      }
    }
    if (count > best_count) {
      best_count = count;
      best_start = start;
    }
  }

  sel.window_start_s = best_start;
  sel.window_start_interval = static_cast<int>(std::llround((best_start - t_min) / interval_s));
  sel.window_end_interval =
      sel.window_start_interval + static_cast<int>(std::llround(window_s / interval_s));
  for (const auto& [id, trace] : traces) {
    for (const auto& [ts, p] : trace.samples) {
      if (ts < best_start || ts >= best_start + window_s) continue;
      if (inside(p)) {
        sel.user_ids.insert(id);
        break;
      }
    }
  }
  return sel;
}

TraceBundle extract_rush_hour(const TraceBundle& bundle, const RushHourSelection& selection) {
  TraceBundle out;
  for (const BaseStation& bs : bundle.stations)
    if (selection.station_ids.count(bs.id)) out.stations.push_back(bs);
  std::set<int> kept_stations;
  for (const BaseStation& bs : out.stations) kept_stations.insert(bs.id);
  for (const EdgeServer& s : bundle.servers)
    if (kept_stations.count(s.base_station_id)) out.servers.push_back(s);

  for (const MobileUser& u : bundle.users) {
    if (!selection.user_ids.count(u.id)) continue;
    MobileUser copy = u;
    copy.trace.samples.clear();
    for (const auto& [ts, p] : u.trace.samples)
      if (ts >= selection.window_start_s)
        copy.trace.samples.emplace_back(ts - selection.window_start_s, p);
    if (copy.trace.samples.empty()) continue;
    out.users.push_back(std::move(copy));
    for (const EdgeService& svc : bundle.services)
      if (svc.id == u.service_id) out.services.push_back(svc);
  }
  if (out.stations.empty()) throw TraceError("extract_rush_hour: no stations in selection");
  if (out.users.empty()) throw TraceError("extract_rush_hour: no users in selection");
  return out;
}

}  // namespace mecsim
