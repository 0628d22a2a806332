// Experiment driver: single runs, parameter sweeps and the competitive-ratio
// bound calculator. Exit codes: 0 success, 2 configuration error, 3 trace
// error, 4 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mecsim/config.hpp"
#include "mecsim/sim.hpp"
#include "mecsim/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

mecsim::TraceBundle build_bundle(const mecsim::AppConfig& cfg, bool synth,
                                 const std::string& traces_dir, bool rush_hour) {
  if (synth) return mecsim::synth_world(cfg.world);

  const fs::path dir(traces_dir);
  auto [stations, servers] =
      mecsim::load_station_csv((dir / "stations.csv").string(), cfg.world.server_mips);
  const auto mobility = mecsim::load_mobility_csv((dir / "mobility.csv").string());
  mecsim::TraceBundle bundle =
      mecsim::assemble_bundle(std::move(stations), std::move(servers), mobility, cfg.world);
  if (rush_hour) {
    const auto selection =
        mecsim::kmeans_rush_hour(mobility, 10, bundle.stations, cfg.world.seed,
                                 cfg.world.half_side_m, 3.0 * 3600.0, cfg.sim.interval_s);
    bundle = mecsim::extract_rush_hour(bundle, selection);
  }
  return bundle;
}

json report_json(const mecsim::MetricsReport& report) {
  json j;
  j["policy"] = report.policy;
  j["aggregate"] = {{"overall_delay_ms", report.aggregate.overall_delay_ms},
                    {"total_migration_cost_km", report.aggregate.total_migration_cost_km},
                    {"mean_overloaded_servers", report.aggregate.mean_overloaded_servers}};
  json rows = json::array();
  for (const auto& m : report.per_interval) {
    rows.push_back({{"interval", m.interval},
                    {"mean_delay_ms", m.mean_delay_ms},
                    {"served", m.served},
                    {"migrations_count", m.migrations},
                    {"migration_cost_km", m.migration_cost_km},
                    {"overloaded_servers", m.overloaded_servers},
                    {"placement_failures", m.placement_failures}});
  }
  j["per_interval"] = rows;
  return j;
}

int run_command(const mecsim::AppConfig& cfg, const std::vector<std::string>& policies,
                bool synth, const std::string& traces_dir, bool rush_hour,
                const std::string& out_dir) {
  const mecsim::TraceBundle bundle = build_bundle(cfg, synth, traces_dir, rush_hour);
  const auto reports = mecsim::compare_policies(bundle, cfg.sim, policies);

  fs::create_directories(out_dir);
  std::ostringstream csv;
  csv.precision(12);
  csv << "policy,interval,mean_delay_ms,served,migrations_count,migration_cost_km,"
         "overloaded_servers,placement_failures\n";
  json all = json::array();
  for (const auto& [name, report] : reports) {
    for (const auto& m : report.per_interval) {
      csv << name << ',' << m.interval << ',' << m.mean_delay_ms << ',' << m.served << ','
          << m.migrations << ',' << m.migration_cost_km << ',' << m.overloaded_servers << ','
          << m.placement_failures << '\n';
    }
    all.push_back(report_json(report));
    std::cout << name << ": overall_delay_ms=" << report.aggregate.overall_delay_ms
              << " migration_cost_km=" << report.aggregate.total_migration_cost_km
              << " mean_overloaded=" << report.aggregate.mean_overloaded_servers << '\n';
  }
  write_file(fs::path(out_dir) / "metrics.csv", csv.str());
  write_file(fs::path(out_dir) / "report.json", all.dump(2) + "\n");
  return 0;
}

int sweep_command(const mecsim::AppConfig& cfg, const std::string& sweep_arg,
                  const std::vector<std::string>& policies, int reps, std::uint64_t seed,
                  const std::string& out_dir) {
  const auto eq = sweep_arg.find('=');
  if (eq == std::string::npos)
    throw mecsim::ConfigError("--sweep expects VAR=v1,v2,... (got '" + sweep_arg + "')");
  mecsim::SweepSpec spec;
  spec.variable = mecsim::parse_sweep_variable(sweep_arg.substr(0, eq));
  for (const std::string& v : split_list(sweep_arg.substr(eq + 1)))
    spec.values.push_back(std::stod(v));
  spec.repetitions = reps;

  mecsim::SweepTable table;
  try {
    table = mecsim::run_sweep(spec, cfg, policies, seed);
  } catch (const mecsim::SweepAborted& e) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "metrics.csv", mecsim::sweep_csv(e.partial()));
    std::cerr << "sweep aborted (partial results flushed): " << e.what() << '\n';
    return 4;
  }

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "metrics.csv", mecsim::sweep_csv(table));
  for (auto metric : {mecsim::SweepMetric::overall_delay_ms, mecsim::SweepMetric::migration_cost_km,
                      mecsim::SweepMetric::mean_overloaded}) {
    write_file(fs::path(out_dir) / ("figure_" + mecsim::sweep_metric_name(metric) + ".csv"),
               mecsim::figure_csv(table, metric));
  }

  json j;
  j["variable"] = mecsim::sweep_variable_name(spec.variable);
  j["values"] = spec.values;
  j["repetitions"] = spec.repetitions;
  j["policies"] = policies;
  j["seed"] = seed;
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"sweep_value", r.sweep_value},
                    {"policy", r.policy},
                    {"repetition", r.repetition},
                    {"overall_delay_ms", r.overall_delay_ms},
                    {"migration_cost_km", r.migration_cost_km},
                    {"mean_overloaded", r.mean_overloaded}});
  }
  j["rows"] = rows;
  write_file(fs::path(out_dir) / "report.json", j.dump(2) + "\n");
  std::cout << "sweep complete: " << table.rows.size() << " rows -> " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mecsim: trace-driven edge service scheduling simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string policy_arg = "pdma";
  std::string sweep_arg;
  std::string traces_dir;
  std::string out_dir = "out";
  bool synth = false;
  bool rush_hour = false;
  int reps = 1;
  std::optional<std::uint64_t> seed_flag;

  auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
  run_cmd->add_option("--config", config_path, "configuration file");
  run_cmd->add_option("--policy", policy_arg, "policy name(s), comma separated");
  run_cmd->add_flag("--synth", synth, "use the synthetic world generator");
  run_cmd->add_option("--traces", traces_dir, "directory with stations.csv and mobility.csv");
  run_cmd->add_flag("--rush-hour", rush_hour, "apply the rush-hour extraction to loaded traces");
  run_cmd->add_option("--seed", seed_flag, "master seed (overrides config)");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  sweep_cmd->add_option("--config", config_path, "configuration file");
  sweep_cmd->add_option("--sweep", sweep_arg, "VAR=v1,v2,... (distance_threshold, server_count, client_count)")
      ->required();
  sweep_cmd->add_option("--policy", policy_arg, "policy name(s), comma separated");
  sweep_cmd->add_option("--reps", reps, "repetitions per cell");
  sweep_cmd->add_option("--seed", seed_flag, "master seed (overrides config)");
  sweep_cmd->add_option("--out", out_dir, "output directory");
  sweep_cmd->add_flag("--synth", synth, "sweeps always use the synthetic generator");

  auto* bound_cmd = app.add_subcommand("bound", "evaluate the competitive-ratio upper bound");
  int bound_j = 1, bound_r = 1;
  double bound_eps = 0.0, bound_delta = 0.0;
  bound_cmd->add_option("--servers", bound_j, "server count J")->required();
  bound_cmd->add_option("--services", bound_r, "service count R")->required();
  bound_cmd->add_option("--epsilon", bound_eps, "processing cost term");
  bound_cmd->add_option("--delta", bound_delta, "migration cost term");

  CLI11_PARSE(app, argc, argv);

  try {
    mecsim::AppConfig cfg;
    if (!config_path.empty()) cfg = mecsim::load_config_file(config_path);
    if (seed_flag) {
      cfg.sim.rng_seed = *seed_flag;
      cfg.world.seed = *seed_flag;
    }

    if (bound_cmd->parsed()) {
      mecsim::CompetitiveParams p{bound_j, bound_r, bound_eps, bound_delta};
      std::cout.precision(12);
      std::cout << mecsim::competitive_bound(p) << '\n';
      return 0;
    }

    const std::vector<std::string> policies = split_list(policy_arg);
    if (policies.empty()) throw mecsim::ConfigError("no policy given");
    for (const auto& p : policies)
      if (!mecsim::is_known_policy(p)) throw mecsim::ConfigError("unknown policy '" + p + "'");

    if (run_cmd->parsed()) {
      if (!synth && traces_dir.empty())
        throw mecsim::ConfigError("run needs --synth or --traces DIR");
      return run_command(cfg, policies, synth, traces_dir, rush_hour, out_dir);
    }
    if (sweep_cmd->parsed())
      return sweep_command(cfg, sweep_arg, policies, reps, cfg.sim.rng_seed, out_dir);
  } catch (const mecsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mecsim::TraceError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
