/* acceptance.cpp -- one pass/fail line per acceptance criterion
 *
 * Exact formula oracles run first, then directional throughput reproduction
 * on the calibrated simulator. The throughput scenarios use the benchmark
 * sweep path end to end: pinned 3000-node graphs, median of 3 seeded reps,
 * cache interference switched on so resident kernels feel co-residency.
 * Exit status is the number of failed criteria.
 */
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "taosched/backend.hpp"
#include "taosched/dag_generator.hpp"
#include "taosched/kernels.hpp"
#include "taosched/machine.hpp"
#include "taosched/policies.hpp"
#include "taosched/ptt.hpp"
#include "taosched/scenario.hpp"

using namespace taosched;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

// the three benchmark graphs; seeds picked so the measured parallelism lands
// on the target values
Scenario narrow_sc() {
  Scenario sc;
  sc.name = "dop1.62";
  sc.shape.mean_layer_width = 1.6;
  sc.dag_seed = 2;
  return sc;
}

Scenario medium_sc() {
  Scenario sc;
  sc.name = "dop3.03";
  sc.shape.mean_layer_width = 3.05;
  sc.dag_seed = 5;
  return sc;
}

Scenario wide_sc() {
  Scenario sc;
  sc.name = "dop8.06";
  sc.shape.mean_layer_width = 8.3;
  sc.dag_seed = 3;
  return sc;
}

MachineModel acceptance_model() {
  MachineModel m = default_hikey_like();
  // co-resident working sets contend for the cluster caches in these runs;
  // the proportional bandwidth law alone cannot slow a narrow place down
  m.cache_penalty_enabled = true;
  return m;
}

double row_throughput(const std::vector<SweepRow>& rows, const std::string& policy,
                      int hint) {
  for (const auto& r : rows)
    if (r.policy == policy && r.hint == hint) return r.throughput_tasks_per_s;
  return 0;
}

int oracle_crit(const TaoDag& dag, int id, std::vector<int>& memo) {
  if (memo[static_cast<size_t>(id)] > 0) return memo[static_cast<size_t>(id)];
  int best = 0;
  for (int s : dag.node(id).successors) best = std::max(best, oracle_crit(dag, s, memo));
  return memo[static_cast<size_t>(id)] = 1 + best;
}

// ---- criteria ----

Check formula_oracles() {
  Check c;
  for (CoreId core = 0; core < 8; ++core)
    for (int w : {1, 2, 4})
      c.require(leader_core(core, w) == (core / w) * w,
                "leader(" + std::to_string(core) + "," + std::to_string(w) + ")");
  c.require(leader_core(7, 4) == 4, "leader(7,4) != 4");

  Rng rng(12345);
  PttTable table(8, 4);
  double shadow = 0;
  for (int i = 0; i < 1000; ++i) {
    double sample = 1.0 + rng.uniform01() * 500.0;
    table.record(0, 1, sample);
    shadow = shadow == 0 ? sample : (4.0 * shadow + sample) / 5.0;
    c.require(table.read(0, 1) == shadow, "EWMA deviates from (4*old+new)/5");
  }

  MachineModel model = default_hikey_like();
  PolicyConfig cfg;
  SchedulerState st(model, cfg);
  double threshold = 1.5;
  for (int i = 0; i < 1000; ++i) {
    double w = 0.3 + rng.uniform01() * 3.0;
    st.observe_weight(w);
    threshold = (w + 6.0 * threshold) / 7.0;
    c.require(std::abs(st.weight_threshold() - threshold) < 1e-12,
              "threshold deviates from (w+6t)/7");
  }

  for (std::uint64_t seed = 1; seed <= 100 && c.ok; ++seed) {
    Rng gen(seed * 31);
    TaoDag dag;
    if (seed % 2 == 0) {
      int n = gen.uniform_int(2, 1000);
      double p = gen.uniform01() * 8.0 / n;
      for (int i = 0; i < n; ++i) dag.add_node(TaskType::Synthetic);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (gen.uniform01() < p) dag.add_edge(i, j);
      dag.finalize();
      assign_criticality(dag);
    } else {
      DagShape shape;
      shape.mean_layer_width = 1.0 + static_cast<double>(seed % 9);
      dag = generate_random_dag(gen.uniform_int(50, 1000), TypeMix{}, shape, seed);
    }
    std::vector<int> memo(static_cast<size_t>(dag.node_count()), 0);
    for (const auto& n : dag.nodes())
      c.require(n.criticality == oracle_crit(dag, n.id, memo),
                "criticality oracle mismatch at seed " + std::to_string(seed));
  }
  return c;
}

Check ptt_convergence() {
  Check c;
  c.require(std::pow(0.8, 21) < 0.01, "decay arithmetic");
  for (double gap : {10.0, 400.0, 9000.0}) {
    PttTable table(8, 4);
    const double target = 300.0;
    table.record(4, 2, target + gap);
    for (int i = 0; i < 21; ++i) table.record(4, 2, target);
    c.require(std::abs(table.read(4, 2) - target) < 0.01 * gap,
              "cell error above 1% of a " + std::to_string(gap) + "us gap");
  }
  return c;
}

Check determinism() {
  Check c;
  Scenario sc = medium_sc();
  MachineModel model = acceptance_model();
  TaoDag dag = generate_random_dag(sc.n_tasks, sc.mix, sc.shape, sc.dag_seed);
  for (const auto& name : canonical_policy_names()) {
    RunOptions opt;
    opt.policy = policy_config_from_name(name);
    opt.seed = 7;
    opt.record_trace = true;
    std::string first = trace_fingerprint(run_simulated(dag, model, opt).trace);
    for (int rep = 1; rep < 3; ++rep)
      c.require(trace_fingerprint(run_simulated(dag, model, opt).trace) == first,
                name + " trace differs across identically seeded runs");
  }
  return c;
}

Check exactly_once_conservation() {
  Check c;
  MachineModel model = default_hikey_like();
  for (const auto& name : canonical_policy_names()) {
    RunOptions opt;
    opt.policy = policy_config_from_name(name);
    opt.record_trace = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      DagShape shape;
      shape.mean_layer_width = 1.0 + static_cast<double>(seed % 9);
      TaoDag dag = generate_random_dag(600, TypeMix{}, shape, seed);
      opt.seed = seed;
      RunMetrics m = run_simulated(dag, model, opt);
      std::set<int> seen;
      for (const auto& e : m.trace) seen.insert(e.task);
      c.require(m.trace.size() == static_cast<size_t>(dag.node_count()) &&
                    static_cast<int>(seen.size()) == dag.node_count(),
                name + " sim seed " + std::to_string(seed) + ": trace not exactly-once");
      c.require(m.total_busy_ns() + m.total_idle_ns() ==
                    model.core_count() * m.makespan_ns,
                name + " sim seed " + std::to_string(seed) + ": busy+idle != cores*makespan");
    }
    opt.native_work_scale = 0.02;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      DagShape shape;
      shape.mean_layer_width = 1.0 + static_cast<double>(seed % 7);
      TaoDag dag = generate_random_dag(30, TypeMix{}, shape, seed);
      opt.seed = seed;
      RunMetrics m = run_native(dag, model, opt);
      std::set<int> seen;
      for (const auto& e : m.trace) seen.insert(e.task);
      c.require(m.trace.size() == static_cast<size_t>(dag.node_count()) &&
                    static_cast<int>(seen.size()) == dag.node_count(),
                name + " native seed " + std::to_string(seed) + ": trace not exactly-once");
    }
  }
  return c;
}

Check directional_throughput(std::string& extra) {
  Check c;
  MachineModel model = acceptance_model();
  SweepConfig cfg;
  cfg.policies = {"homogeneous", "crit-ptt", "weight"};
  cfg.hints = {1, 4};
  cfg.reps = 3;

  auto narrow = run_sweep(narrow_sc(), model, cfg);
  c.require(std::abs(narrow.front().dop - 1.62) < 0.2, "narrow graph parallelism drifted");
  const double n_h1 = row_throughput(narrow, "homogeneous", 1);
  const double n_h4 = row_throughput(narrow, "homogeneous", 4);
  const double n_best =
      std::max(row_throughput(narrow, "crit-ptt", 4), row_throughput(narrow, "weight", 4));
  c.require(n_best >= 1.5 * n_h1, "molding policy below 1.5x width-1 baseline at low dop");
  c.require(n_best >= 1.1 * n_h4, "molding policy below 1.1x width-4 baseline at low dop");

  auto wide = run_sweep(wide_sc(), model, cfg);
  c.require(std::abs(wide.front().dop - 8.06) < 0.2, "wide graph parallelism drifted");
  const double w_h1 = row_throughput(wide, "homogeneous", 1);
  const double w_h4 = row_throughput(wide, "homogeneous", 4);
  const double w_crit = row_throughput(wide, "crit-ptt", 1);
  const double w_weight = row_throughput(wide, "weight", 1);
  c.require(w_h1 > w_h4, "width-1 homogeneous no longer beats width-4 at high dop");
  c.require(w_crit >= w_h1, "crit-ptt molding below the width-1 baseline at high dop");
  c.require(w_weight >= w_h1, "weight molding below the width-1 baseline at high dop");

  char buf[160];
  std::snprintf(buf, sizeof buf,
                " low-dop best/h1 %.2fx, best/h4 %.2fx; high-dop crit %.3fx, weight %.3fx",
                n_h1 > 0 ? n_best / n_h1 : 0, n_h4 > 0 ? n_best / n_h4 : 0,
                w_h1 > 0 ? w_crit / w_h1 : 0, w_h1 > 0 ? w_weight / w_h1 : 0);
  extra = buf;
  return c;
}

Check molding_ablation(std::string& extra) {
  Check c;
  MachineModel model = acceptance_model();
  SweepConfig cfg;
  cfg.reps = 3;
  const std::vector<std::string> policies = {"crit-ptt", "weight"};

  cfg.hints = {4};  // hint-4 layout for the low and medium graphs
  for (const Scenario& sc : {narrow_sc(), medium_sc()})
    for (const auto& rep : ablate_molding(sc, model, cfg, policies)) {
      const double delta = rep.with_throughput / rep.without_throughput - 1.0;
      c.require(std::abs(delta) <= 0.03, sc.name + " " + rep.policy +
                                             " molding moved throughput by " +
                                             std::to_string(delta * 100) + "% at hint 4");
    }

  cfg.hints = {1};  // hint-1 layout for the wide graph
  double best_gain = -1;
  std::string gains;
  for (const auto& rep : ablate_molding(wide_sc(), model, cfg, policies)) {
    const double delta = rep.with_throughput / rep.without_throughput - 1.0;
    best_gain = std::max(best_gain, delta);
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s %+.2f%%", rep.policy.c_str(), delta * 100);
    gains += buf;
  }
  c.require(best_gain >= 0.02,
            "no molding policy improved wide-graph throughput by 2% (best " +
                std::to_string(best_gain * 100) + "%)");
  extra = " hint-1 gains:" + gains;
  return c;
}

Check policy_contracts() {
  Check c;
  MachineModel model = default_hikey_like();
  Scenario sc = medium_sc();
  TaoDag dag = generate_random_dag(sc.n_tasks, sc.mix, sc.shape, sc.dag_seed);
  size_t audited = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    RunOptions opt;
    opt.policy = policy_config_from_name("crit-aware");
    opt.seed = seed;
    opt.record_decisions = true;
    RunMetrics m = run_simulated(dag, model, opt);
    for (const auto& d : m.decisions) {
      c.require(d.critical == (d.criticality >= d.max_running_crit),
                "criticality verdict does not match the tracker comparison");
      c.require(d.to_big == (model.cluster_of(d.chosen_core) == model.big_cluster()),
                "recorded cluster flag disagrees with the chosen core");
      c.require(d.critical == d.to_big, "critical task off the big cluster or vice versa");
    }
    audited += m.decisions.size();
  }
  c.require(audited >= 10000, "audited only " + std::to_string(audited) + " wakeups");

  // cold tables: every PTT-driven decision must fall back, never dereference
  // the unmeasured sentinel
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto names = canonical_policy_names();
    RunOptions opt;
    opt.policy = policy_config_from_name(names[seed % names.size()]);
    opt.seed = seed;
    DagShape shape;
    shape.mean_layer_width = 1.0 + static_cast<double>(seed % 8);
    TaoDag cold = generate_random_dag(150, TypeMix{}, shape, seed ^ 0xc01d);
    RunMetrics m = run_simulated(cold, model, opt);
    c.require(m.tasks_executed == static_cast<size_t>(cold.node_count()),
              "cold-start run dropped tasks at seed " + std::to_string(seed));
  }
  return c;
}

Check native_sanity() {
  Check c;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (int width : {1, 2, 4}) {
      KernelTask sort(TaskType::Sort, {16384, seed}, width);
      for (int m = 0; m < width; ++m) sort.run_share(m);
      c.require(std::is_sorted(sort.keys().begin(), sort.keys().end()),
                "sort output unsorted");
      auto ref = sort.input_keys();
      std::sort(ref.begin(), ref.end());
      c.require(ref == sort.keys(), "sort output not a permutation");

      KernelTask mm(TaskType::Matmul, {24, seed}, width);
      for (int m = 0; m < width; ++m) mm.run_share(m);
      auto oracle = naive_matmul(mm.matrix_a(), mm.matrix_b(), mm.matrix_dim());
      for (size_t i = 0; i < oracle.size(); ++i)
        c.require(std::abs(oracle[i] - mm.matrix_c()[i]) <=
                      1e-9 * std::max(1.0, std::abs(oracle[i])),
                  "matmul off the reference loop by more than 1e-9 relative");

      KernelTask copy(TaskType::Copy, {16384, seed}, width);
      for (int m = 0; m < width; ++m) copy.run_share(m);
      c.require(copy.copy_dst() == copy.copy_src(), "copy output differs from source");
      double src_sum = 0, dst_sum = 0;
      for (double x : copy.copy_src()) src_sum += x;
      for (double x : copy.copy_dst()) dst_sum += x;
      c.require(src_sum == dst_sum, "copy checksum mismatch");
    }
  }
  // end to end: the backend validates every kernel at commit and fails the
  // run on any violation, so clean completions are the real assertion
  MachineModel model = default_hikey_like();
  DagShape shape;
  shape.mean_layer_width = 3.0;
  TaoDag dag = generate_random_dag(60, TypeMix{}, shape, 77);
  for (const auto& name : {"homogeneous", "weight"}) {
    RunOptions opt;
    opt.policy = policy_config_from_name(name);
    opt.seed = 3;
    opt.native_work_scale = 0.05;
    RunMetrics m = run_native(dag, model, opt);
    c.require(m.tasks_executed == static_cast<size_t>(dag.node_count()),
              std::string(name) + " native run incomplete");
  }
  return c;
}

struct Criterion {
  const char* label;
  double budget_s;  // 0 = no stated budget
  Check (*fn)();
  Check (*fn_extra)(std::string&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"formula oracles (leader rule, EWMA, threshold, criticality)", 10, formula_oracles,
       nullptr},
      {"PTT convergence within 21 stationary updates", 0, ptt_convergence, nullptr},
      {"bit-identical traces across seeded simulator runs", 60, determinism, nullptr},
      {"exactly-once execution and exact busy+idle conservation", 0,
       exactly_once_conservation, nullptr},
      {"directional throughput reproduction on the calibrated model", 300, nullptr,
       directional_throughput},
      {"molding ablation: flat at low parallelism, gains when wide", 0, nullptr,
       molding_ablation},
      {"placement contract audit and cold-table fuzz", 0, policy_contracts, nullptr},
      {"native kernels against independent oracles", 0, native_sanity, nullptr},
  };

  int failures = 0;
  int idx = 0;
  for (const auto& cr : criteria) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    std::string extra;
    Check c = cr.fn ? cr.fn() : cr.fn_extra(extra);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_s > 0 && secs > cr.budget_s) {
      c.ok = false;
      c.detail = "exceeded the " + std::to_string(cr.budget_s) + "s budget";
    }
    std::printf("criterion %d: %s  %s%s  [%.1fs]\n", idx, c.ok ? "PASS" : "FAIL", cr.label,
                extra.c_str(), secs);
    if (!c.ok) {
      std::printf("             %s\n", c.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/8 criteria passed\n", 8 - failures);
  return failures;
}
