#include "mecsim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mecsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size())
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  return x;
}

int to_int(const std::string& v, const std::string& key) {
  const double x = to_double(v, key);
  if (x != std::floor(x)) throw ConfigError("config key '" + key + "': expected an integer");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw ConfigError("config key '" + key + "': bad unsigned integer '" + v + "'");
  }
}

std::vector<double> to_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out << ',';
    out << xs[i];
  }
  return out.str();
}

}  // namespace

AppConfig parse_config(const std::string& text) {
  AppConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"sim.interval_s", [&](auto& k, auto& v) { cfg.sim.interval_s = to_double(v, k); }},
      {"sim.horizon_intervals",
       [&](auto& k, auto& v) { cfg.sim.horizon_intervals = to_int(v, k); }},
      {"sim.migration_downtime_ms",
       [&](auto& k, auto& v) { cfg.sim.migration_downtime_ms = to_double(v, k); }},
      {"sim.rng_seed", [&](auto& k, auto& v) { cfg.sim.rng_seed = to_u64(v, k); }},
      {"sim.overload_threshold",
       [&](auto& k, auto& v) { cfg.sim.overload_threshold = to_double(v, k); }},
      {"sim.link_delay_min_ms",
       [&](auto& k, auto& v) { cfg.sim.link_delay_min_ms = to_double(v, k); }},
      {"sim.link_delay_max_ms",
       [&](auto& k, auto& v) { cfg.sim.link_delay_max_ms = to_double(v, k); }},
      {"sim.knn_k", [&](auto& k, auto& v) { cfg.sim.knn_k = to_int(v, k); }},
      {"sim.bits_per_instruction",
       [&](auto& k, auto& v) { cfg.sim.bits_per_instruction = to_double(v, k); }},
      {"sim.failure_penalty_factor",
       [&](auto& k, auto& v) { cfg.sim.failure_penalty_factor = to_double(v, k); }},
      {"sim.oversubscription_limit",
       [&](auto& k, auto& v) { cfg.sim.oversubscription_limit = to_double(v, k); }},
      {"channel.bandwidth_hz",
       [&](auto& k, auto& v) { cfg.sim.channel.bandwidth_hz = to_double(v, k); }},
      {"channel.noise_power_w",
       [&](auto& k, auto& v) { cfg.sim.channel.noise_power_w = to_double(v, k); }},
      {"channel.pathloss_a_db",
       [&](auto& k, auto& v) { cfg.sim.channel.pathloss_a_db = to_double(v, k); }},
      {"channel.pathloss_b_db_per_decade",
       [&](auto& k, auto& v) { cfg.sim.channel.pathloss_b_db_per_decade = to_double(v, k); }},
      {"policy.assignment_shape_p",
       [&](auto& k, auto& v) { cfg.sim.policy.assignment_shape_p = to_double(v, k); }},
      {"policy.assignment_threshold",
       [&](auto& k, auto& v) { cfg.sim.policy.assignment_threshold = to_double(v, k); }},
      {"policy.migration_shape_beta",
       [&](auto& k, auto& v) { cfg.sim.policy.migration_shape_beta = to_double(v, k); }},
      {"policy.migration_threshold",
       [&](auto& k, auto& v) { cfg.sim.policy.migration_threshold = to_double(v, k); }},
      {"policy.delay_threshold_ms",
       [&](auto& k, auto& v) { cfg.sim.policy.delay_threshold_ms = to_double(v, k); }},
      {"policy.distance_threshold_m",
       [&](auto& k, auto& v) { cfg.sim.policy.distance_threshold_m = to_double(v, k); }},
      {"world.stations", [&](auto& k, auto& v) { cfg.world.stations = to_int(v, k); }},
      {"world.users", [&](auto& k, auto& v) { cfg.world.users = to_int(v, k); }},
      {"world.center_lat", [&](auto& k, auto& v) { cfg.world.center.lat = to_double(v, k); }},
      {"world.center_lng", [&](auto& k, auto& v) { cfg.world.center.lng = to_double(v, k); }},
      {"world.half_side_m", [&](auto& k, auto& v) { cfg.world.half_side_m = to_double(v, k); }},
      {"world.server_mips", [&](auto& k, auto& v) { cfg.world.server_mips = to_list(v, k); }},
      {"world.server_ram_gb",
       [&](auto& k, auto& v) { cfg.world.server_ram_gb = to_double(v, k); }},
      {"world.server_storage_tb",
       [&](auto& k, auto& v) { cfg.world.server_storage_tb = to_double(v, k); }},
      {"world.service_mips", [&](auto& k, auto& v) { cfg.world.service_mips = to_list(v, k); }},
      {"world.service_ram_gb",
       [&](auto& k, auto& v) { cfg.world.service_ram_gb = to_double(v, k); }},
      {"world.task_size_mi", [&](auto& k, auto& v) { cfg.world.task_size_mi = to_double(v, k); }},
      {"world.transmit_power_w",
       [&](auto& k, auto& v) { cfg.world.transmit_power_w = to_double(v, k); }},
      {"world.spares_per_station",
       [&](auto& k, auto& v) { cfg.world.spares_per_station = to_int(v, k); }},
      {"world.speed_min_mps", [&](auto& k, auto& v) { cfg.world.speed_min_mps = to_double(v, k); }},
      {"world.speed_max_mps", [&](auto& k, auto& v) { cfg.world.speed_max_mps = to_double(v, k); }},
      {"world.waypoint_range_m",
       [&](auto& k, auto& v) { cfg.world.waypoint_range_m = to_double(v, k); }},
      {"world.pause_max_intervals",
       [&](auto& k, auto& v) { cfg.world.pause_max_intervals = to_int(v, k); }},
      {"world.gps_noise_m", [&](auto& k, auto& v) { cfg.world.gps_noise_m = to_double(v, k); }},
      {"world.residents_per_station",
       [&](auto& k, auto& v) { cfg.world.residents_per_station = to_int(v, k); }},
      {"world.resident_demand_frac",
       [&](auto& k, auto& v) { cfg.world.resident_demand_frac = to_double(v, k); }},
      {"world.workload_start_min",
       [&](auto& k, auto& v) { cfg.world.workload_start_min = to_double(v, k); }},
      {"world.workload_start_max",
       [&](auto& k, auto& v) { cfg.world.workload_start_max = to_double(v, k); }},
      {"world.workload_step",
       [&](auto& k, auto& v) { cfg.world.workload_step = to_double(v, k); }},
      {"world.workload_multiplier",
       [&](auto& k, auto& v) { cfg.world.workload_multiplier = to_int(v, k); }},
  };

  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(key, value);
  }

  cfg.sim.validate();
  // The generator horizon follows the simulation horizon; only [sim] owns it.
  cfg.world.horizon_intervals = cfg.sim.horizon_intervals;
  cfg.world.interval_s = cfg.sim.interval_s;
  cfg.world.seed = cfg.sim.rng_seed;
  return cfg;
}

AppConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const AppConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "[sim]\n";
  out << "interval_s = " << cfg.sim.interval_s << '\n';
  out << "horizon_intervals = " << cfg.sim.horizon_intervals << '\n';
  out << "migration_downtime_ms = " << cfg.sim.migration_downtime_ms << '\n';
  out << "rng_seed = " << cfg.sim.rng_seed << '\n';
  out << "overload_threshold = " << cfg.sim.overload_threshold << '\n';
  out << "link_delay_min_ms = " << cfg.sim.link_delay_min_ms << '\n';
  out << "link_delay_max_ms = " << cfg.sim.link_delay_max_ms << '\n';
  out << "knn_k = " << cfg.sim.knn_k << '\n';
  out << "bits_per_instruction = " << cfg.sim.bits_per_instruction << '\n';
  out << "failure_penalty_factor = " << cfg.sim.failure_penalty_factor << '\n';
  out << "oversubscription_limit = " << cfg.sim.oversubscription_limit << '\n';
  out << "\n[channel]\n";
  out << "bandwidth_hz = " << cfg.sim.channel.bandwidth_hz << '\n';
  out << "noise_power_w = " << cfg.sim.channel.noise_power_w << '\n';
  out << "pathloss_a_db = " << cfg.sim.channel.pathloss_a_db << '\n';
  out << "pathloss_b_db_per_decade = " << cfg.sim.channel.pathloss_b_db_per_decade << '\n';
  out << "\n[policy]\n";
  out << "assignment_shape_p = " << cfg.sim.policy.assignment_shape_p << '\n';
  out << "assignment_threshold = " << cfg.sim.policy.assignment_threshold << '\n';
  out << "migration_shape_beta = " << cfg.sim.policy.migration_shape_beta << '\n';
  out << "migration_threshold = " << cfg.sim.policy.migration_threshold << '\n';
  out << "delay_threshold_ms = " << cfg.sim.policy.delay_threshold_ms << '\n';
  out << "distance_threshold_m = " << cfg.sim.policy.distance_threshold_m << '\n';
  out << "\n[world]\n";
  out << "stations = " << cfg.world.stations << '\n';
  out << "users = " << cfg.world.users << '\n';
  out << "center_lat = " << cfg.world.center.lat << '\n';
  out << "center_lng = " << cfg.world.center.lng << '\n';
  out << "half_side_m = " << cfg.world.half_side_m << '\n';
  out << "server_mips = " << join(cfg.world.server_mips) << '\n';
  out << "server_ram_gb = " << cfg.world.server_ram_gb << '\n';
  out << "server_storage_tb = " << cfg.world.server_storage_tb << '\n';
  out << "service_mips = " << join(cfg.world.service_mips) << '\n';
  out << "service_ram_gb = " << cfg.world.service_ram_gb << '\n';
  out << "task_size_mi = " << cfg.world.task_size_mi << '\n';
  out << "transmit_power_w = " << cfg.world.transmit_power_w << '\n';
  out << "spares_per_station = " << cfg.world.spares_per_station << '\n';
  out << "speed_min_mps = " << cfg.world.speed_min_mps << '\n';
  out << "speed_max_mps = " << cfg.world.speed_max_mps << '\n';
  out << "waypoint_range_m = " << cfg.world.waypoint_range_m << '\n';
  out << "pause_max_intervals = " << cfg.world.pause_max_intervals << '\n';
  out << "gps_noise_m = " << cfg.world.gps_noise_m << '\n';
  out << "residents_per_station = " << cfg.world.residents_per_station << '\n';
  out << "resident_demand_frac = " << cfg.world.resident_demand_frac << '\n';
  out << "workload_start_min = " << cfg.world.workload_start_min << '\n';
  out << "workload_start_max = " << cfg.world.workload_start_max << '\n';
  out << "workload_step = " << cfg.world.workload_step << '\n';
  out << "workload_multiplier = " << cfg.world.workload_multiplier << '\n';
  return out.str();
}

}  // namespace mecsim
