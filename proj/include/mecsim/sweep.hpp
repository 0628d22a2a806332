#ifndef MECSIM_SWEEP_HPP_
#define MECSIM_SWEEP_HPP_

#include <string>
#include <vector>

#include "mecsim/config.hpp"
#include "mecsim/sim.hpp"

namespace mecsim {

// Upper bound on the PDMA/OPT cost ratio:
// 1 + (2 + eps + delta) * J * R / ((1 + eps + delta) * (J + R)).
double competitive_bound(const CompetitiveParams& params);

enum class SweepVariable { distance_threshold, server_count, client_count };

SweepVariable parse_sweep_variable(const std::string& name);
std::string sweep_variable_name(SweepVariable v);

struct SweepSpec {
  SweepVariable variable = SweepVariable::distance_threshold;
  std::vector<double> values;
  int repetitions = 1;
};

struct SweepRow {
  double sweep_value = 0.0;
  std::string policy;
  int repetition = 0;
  double overall_delay_ms = 0.0;
  double migration_cost_km = 0.0;
  double mean_overloaded = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

// A failed cell aborts the sweep; the rows completed before it (in row
// order) ride along so callers can flush partial results.
class SweepAborted : public std::runtime_error {
 public:
  SweepAborted(const std::string& msg, SweepTable partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const SweepTable& partial() const { return partial_; }

 private:
  SweepTable partial_;
};

// Runs value x policy x repetition cells on synthetic worlds. Each cell's
// decision stream is seeded from (master, value, policy, repetition); the
// world and link-delay streams depend only on (master, value-if-structural,
// repetition) so that policies within a cell row face identical inputs.
// Cells execute on a bounded worker pool; row order is fixed regardless of
// scheduling.
SweepTable run_sweep(const SweepSpec& spec, const AppConfig& base,
                     const std::vector<std::string>& policies, std::uint64_t master_seed,
                     int max_workers = 0);

// Long-format CSV:
// sweep_value,policy,repetition,overall_delay_ms,migration_cost_km,mean_overloaded
std::string sweep_csv(const SweepTable& table);

enum class SweepMetric { overall_delay_ms, migration_cost_km, mean_overloaded };

std::string sweep_metric_name(SweepMetric m);

// Per-figure pivot: sweep_value,policy,mean,stddev (sample stddev; 0 for a
// single repetition).
std::string figure_csv(const SweepTable& table, SweepMetric metric);

}  // namespace mecsim

#endif  // MECSIM_SWEEP_HPP_
