/* scenario.hpp -- benchmark sweeps: policies x hints over a generated graph */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "taosched/backend.hpp"
#include "taosched/dag_generator.hpp"

namespace taosched {

struct Scenario {
  std::string name = "scenario";
  int n_tasks = 3000;
  DagShape shape;
  TypeMix mix;
  std::uint64_t dag_seed = 1;
};

struct SweepConfig {
  std::vector<std::string> policies;  // empty = all canonical ones
  std::vector<int> hints = {1, 4};
  int reps = 5;
  Backend backend = Backend::Sim;
  std::uint64_t run_seed = 7;
  double native_work_scale = 1.0;
};

struct RepStat {
  double makespan_us = 0;
  double throughput_tasks_per_s = 0;
  std::size_t steals = 0;
  std::size_t widened = 0;
  std::size_t narrowed = 0;
};

// one (scenario, policy, hint) cell: every rep plus the median summary
struct SweepRow {
  std::string scenario;
  std::string policy;
  int hint = 1;
  std::string backend;
  int tasks = 0;
  double dop = 0;
  std::vector<RepStat> reps;
  double median_makespan_us = 0;
  double throughput_tasks_per_s = 0;  // tasks / median makespan
};

struct AblationReport {
  std::string scenario;
  std::string policy;
  int hint = 1;  // the hint where the no-molding base ran fastest
  double dop = 0;
  double without_molding_us = 0;
  double with_molding_us = 0;
  double without_throughput = 0;
  double with_throughput = 0;
  // (without - with) / without; positive means molding helped
  double delta_frac = 0;
};

// overwrites each node's resource hint; widths above a cluster's capacity
// shrink at dispatch
void set_uniform_hint(TaoDag& dag, int hint);

// middle value, or the mean of the two middles for even counts
double median(std::vector<double> xs);

// one generated graph, every (policy, hint) combination, median of reps
std::vector<SweepRow> run_sweep(const Scenario& sc, const MachineModel& model,
                                const SweepConfig& cfg);

// the same sweep over an already-built graph
std::vector<SweepRow> run_sweep_on(const TaoDag& base, const std::string& name,
                                   const MachineModel& model, const SweepConfig& cfg);

// For each policy: find the hint (among cfg.hints) where the policy runs
// fastest with molding off, then rerun with molding on at that hint.
std::vector<AblationReport> ablate_molding(const Scenario& sc, const MachineModel& model,
                                           const SweepConfig& cfg,
                                           const std::vector<std::string>& policies);

// per-rep rows followed by a median row per cell; throughput always equals
// tasks/makespan for the same row
void write_results_csv(std::ostream& os, const std::vector<SweepRow>& rows);

void write_ablation_csv(std::ostream& os, const std::vector<AblationReport>& reports);

// grouped-bar data for one scenario: one line per (policy, hint) in the
// requested grid; combinations absent from `rows` print NA, never vanish
void emit_plot_data(std::ostream& os, const std::vector<SweepRow>& rows,
                    const std::string& scenario, const std::vector<std::string>& policies,
                    const std::vector<int>& hints);

// per (scenario, hint, policy) speedup against a baseline row from the same
// scenario and the given hint; rows without a usable baseline print NA
void write_speedup_table(std::ostream& os, const std::vector<SweepRow>& rows,
                         const std::string& baseline_policy, int baseline_hint);

}  // namespace taosched
