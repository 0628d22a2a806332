#include "mecsim/sweep.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace mecsim {

double competitive_bound(const CompetitiveParams& params) {
  if (params.servers < 1 || params.services < 1)
    throw ConfigError("competitive_bound: J and R must be >= 1");
  if (params.epsilon < 0 || params.delta < 0)
    throw ConfigError("competitive_bound: epsilon and delta must be >= 0");
  const double j = params.servers;
  const double r = params.services;
  const double s = params.epsilon + params.delta;
  return 1.0 + (2.0 + s) * j * r / ((1.0 + s) * (j + r));
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "distance_threshold") return SweepVariable::distance_threshold;
  if (name == "server_count") return SweepVariable::server_count;
  if (name == "client_count") return SweepVariable::client_count;
  throw ConfigError("unknown sweep variable '" + name +
                    "' (expected distance_threshold, server_count or client_count)");
}

std::string sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::distance_threshold: return "distance_threshold";
    case SweepVariable::server_count: return "server_count";
    case SweepVariable::client_count: return "client_count";
  }
  return "?";
}

std::string sweep_metric_name(SweepMetric m) {
  switch (m) {
    case SweepMetric::overall_delay_ms: return "overall_delay_ms";
    case SweepMetric::migration_cost_km: return "migration_cost_km";
    case SweepMetric::mean_overloaded: return "mean_overloaded";
  }
  return "?";
}

namespace {

std::uint64_t value_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

struct Cell {
  double value;
  std::string policy;
  int rep;
};

}  // namespace

SweepTable run_sweep(const SweepSpec& spec, const AppConfig& base,
                     const std::vector<std::string>& policies, std::uint64_t master_seed,
                     int max_workers) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  if (spec.repetitions < 1) throw ConfigError("sweep repetitions must be >= 1");
  if (policies.empty()) throw ConfigError("sweep needs at least one policy");
  for (const std::string& p : policies)
    if (!is_known_policy(p)) throw ConfigError("unknown policy '" + p + "'");

  std::vector<Cell> cells;
  for (double v : spec.values)
    for (const std::string& p : policies)
      for (int r = 0; r < spec.repetitions; ++r) cells.push_back({v, p, r});

  SweepTable table;
  table.rows.resize(cells.size());
  std::vector<std::string> errors(cells.size());

  parallel_for_indexed(
      cells.size(),
      [&](std::size_t i) {
        const Cell& cell = cells[i];
        try {
          AppConfig cfg = base;
          // Structural variables reshape the world; the threshold only
          // changes the radio range, so worlds stay shared across values.
          std::uint64_t world_salt = 0;
          switch (spec.variable) {
            case SweepVariable::distance_threshold:
              cfg.sim.policy.distance_threshold_m = cell.value;
              break;
            case SweepVariable::server_count:
              cfg.world.stations = static_cast<int>(cell.value);
              world_salt = value_bits(cell.value);
              break;
            case SweepVariable::client_count:
              cfg.world.users = static_cast<int>(cell.value);
              world_salt = value_bits(cell.value);
              break;
          }
          cfg.world.horizon_intervals = cfg.sim.horizon_intervals;
          cfg.world.interval_s = cfg.sim.interval_s;
          cfg.world.seed = derive_seed(
              master_seed, {hash_str("world"), world_salt, static_cast<std::uint64_t>(cell.rep)});
          cfg.sim.rng_seed = cfg.world.seed;

          const TraceBundle bundle = synth_world(cfg.world);
          const std::uint64_t policy_seed =
              derive_seed(master_seed, {value_bits(cell.value), hash_str(cell.policy),
                                        static_cast<std::uint64_t>(cell.rep)});
          const MetricsReport report = run(bundle, cfg.sim, cell.policy, policy_seed);

          SweepRow& row = table.rows[i];
          row.sweep_value = cell.value;
          row.policy = cell.policy;
          row.repetition = cell.rep;
          row.overall_delay_ms = report.aggregate.overall_delay_ms;
          row.migration_cost_km = report.aggregate.total_migration_cost_km;
          row.mean_overloaded = report.aggregate.mean_overloaded_servers;
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      },
      max_workers);

  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) {
      SweepTable partial;
      for (std::size_t j = 0; j < i; ++j) partial.rows.push_back(table.rows[j]);
      throw SweepAborted("sweep cell (" + sweep_variable_name(spec.variable) + "=" +
                             std::to_string(cells[i].value) + ", " + cells[i].policy + ", rep " +
                             std::to_string(cells[i].rep) + ") failed: " + errors[i],
                         std::move(partial));
    }
  }
  return table;
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  out.precision(12);
  out << "sweep_value,policy,repetition,overall_delay_ms,migration_cost_km,mean_overloaded\n";
  for (const SweepRow& r : table.rows) {
    out << r.sweep_value << ',' << r.policy << ',' << r.repetition << ',' << r.overall_delay_ms
        << ',' << r.migration_cost_km << ',' << r.mean_overloaded << '\n';
  }
  return out.str();
}

std::string figure_csv(const SweepTable& table, SweepMetric metric) {
  auto pick = [&](const SweepRow& r) {
    switch (metric) {
      case SweepMetric::overall_delay_ms: return r.overall_delay_ms;
      case SweepMetric::migration_cost_km: return r.migration_cost_km;
      case SweepMetric::mean_overloaded: return r.mean_overloaded;
    }
    return 0.0;
  };

  std::map<std::pair<double, std::string>, std::vector<double>> groups;
  for (const SweepRow& r : table.rows) groups[{r.sweep_value, r.policy}].push_back(pick(r));

  std::ostringstream out;
  out.precision(12);
  out << "sweep_value,policy,mean,stddev\n";
  for (const auto& [key, vals] : groups) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    if (vals.size() > 1) {
      for (double v : vals) var += (v - mean) * (v - mean);
      var /= (vals.size() - 1);
    }
    out << key.first << ',' << key.second << ',' << mean << ',' << std::sqrt(var) << '\n';
  }
  return out.str();
}

}  // namespace mecsim
