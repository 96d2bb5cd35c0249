/* scenario.cpp -- sweep runner and result serialization */
#include "taosched/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace taosched {

void set_uniform_hint(TaoDag& dag, int hint) {
  if (!is_pow2(hint)) throw ConfigError("resource hint must be a power of two");
  for (int i = 0; i < dag.node_count(); ++i) dag.node(i).resource_hint = hint;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw DomainError("median of an empty sample");
  std::sort(xs.begin(), xs.end());
  const size_t k = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[k];
  return 0.5 * (xs[k - 1] + xs[k]);
}

namespace {

double throughput(int tasks, double makespan_us) {
  return makespan_us > 0 ? tasks / (makespan_us * 1e-6) : 0.0;
}

SweepRow run_cell(const TaoDag& dag, double dop, const std::string& scenario_name,
                  const MachineModel& model, const SweepConfig& cfg,
                  const std::string& policy, int hint) {
  SweepRow row;
  row.scenario = scenario_name;
  row.policy = policy;
  row.hint = hint;
  row.backend = to_string(cfg.backend);
  row.tasks = dag.node_count();
  row.dop = dop;

  std::vector<double> makespans;
  for (int r = 0; r < cfg.reps; ++r) {
    RunOptions opt;
    opt.policy = policy_config_from_name(policy);
    opt.seed = mix_seed(cfg.run_seed, static_cast<std::uint64_t>(r));
    opt.native_work_scale = cfg.native_work_scale;
    RunMetrics m = run_backend(cfg.backend, dag, model, opt);
    RepStat rep;
    rep.makespan_us = m.makespan_us;
    rep.throughput_tasks_per_s = throughput(row.tasks, m.makespan_us);
    rep.steals = m.steals;
    rep.widened = m.tasks_widened;
    rep.narrowed = m.tasks_narrowed;
    row.reps.push_back(rep);
    makespans.push_back(m.makespan_us);
  }
  row.median_makespan_us = median(makespans);
  row.throughput_tasks_per_s = throughput(row.tasks, row.median_makespan_us);
  return row;
}

double median_makespan(const TaoDag& dag, const MachineModel& model, const SweepConfig& cfg,
                       const PolicyConfig& policy) {
  std::vector<double> ms;
  for (int r = 0; r < cfg.reps; ++r) {
    RunOptions opt;
    opt.policy = policy;
    opt.seed = mix_seed(cfg.run_seed, static_cast<std::uint64_t>(r));
    opt.native_work_scale = cfg.native_work_scale;
    ms.push_back(run_backend(cfg.backend, dag, model, opt).makespan_us);
  }
  return median(ms);
}

}  // namespace

std::vector<SweepRow> run_sweep(const Scenario& sc, const MachineModel& model,
                                const SweepConfig& cfg) {
  TaoDag base = generate_random_dag(sc.n_tasks, sc.mix, sc.shape, sc.dag_seed);
  return run_sweep_on(base, sc.name, model, cfg);
}

std::vector<SweepRow> run_sweep_on(const TaoDag& base, const std::string& name,
                                   const MachineModel& model, const SweepConfig& cfg) {
  if (cfg.reps < 1) throw ConfigError("sweep needs at least one rep");
  const double dop = degree_of_parallelism(base);
  const std::vector<std::string> policies =
      cfg.policies.empty() ? canonical_policy_names() : cfg.policies;

  std::vector<SweepRow> rows;
  for (int hint : cfg.hints) {
    TaoDag dag = base;
    set_uniform_hint(dag, hint);
    for (const auto& policy : policies)
      rows.push_back(run_cell(dag, dop, name, model, cfg, policy, hint));
  }
  return rows;
}

std::vector<AblationReport> ablate_molding(const Scenario& sc, const MachineModel& model,
                                           const SweepConfig& cfg,
                                           const std::vector<std::string>& policies) {
  if (cfg.hints.empty()) throw ConfigError("ablation needs at least one hint");
  TaoDag base = generate_random_dag(sc.n_tasks, sc.mix, sc.shape, sc.dag_seed);
  const double dop = degree_of_parallelism(base);

  std::vector<AblationReport> out;
  for (const auto& policy : policies) {
    PolicyConfig off = policy_config_from_name(policy);
    off.molding = false;
    // base case: molding off at every hint, keep the fastest
    AblationReport rep;
    rep.scenario = sc.name;
    rep.policy = policy;
    rep.dop = dop;
    rep.without_molding_us = 0;
    for (int hint : cfg.hints) {
      TaoDag dag = base;
      set_uniform_hint(dag, hint);
      double ms = median_makespan(dag, model, cfg, off);
      if (rep.without_molding_us == 0 || ms < rep.without_molding_us) {
        rep.without_molding_us = ms;
        rep.hint = hint;
      }
    }
    PolicyConfig on = policy_config_from_name(policy);
    on.molding = true;
    TaoDag dag = base;
    set_uniform_hint(dag, rep.hint);
    rep.with_molding_us = median_makespan(dag, model, cfg, on);
    rep.without_throughput = sc.n_tasks > 0 && rep.without_molding_us > 0
                                 ? sc.n_tasks / (rep.without_molding_us * 1e-6)
                                 : 0;
    rep.with_throughput = sc.n_tasks > 0 && rep.with_molding_us > 0
                              ? sc.n_tasks / (rep.with_molding_us * 1e-6)
                              : 0;
    if (rep.without_molding_us > 0)
      rep.delta_frac = (rep.without_molding_us - rep.with_molding_us) / rep.without_molding_us;
    out.push_back(rep);
  }
  return out;
}

void write_results_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "# taosched-results v1\n";
  os << "scenario,policy,hint,backend,tasks,dop,rep,makespan_us,"
        "throughput_tasks_per_s,steals,widened,narrowed\n";
  char buf[320];
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.reps.size(); ++i) {
      const RepStat& s = r.reps[i];
      std::snprintf(buf, sizeof buf, "%s,%s,%d,%s,%d,%.4f,%zu,%.3f,%.3f,%zu,%zu,%zu\n",
                    r.scenario.c_str(), r.policy.c_str(), r.hint, r.backend.c_str(),
                    r.tasks, r.dop, i, s.makespan_us, s.throughput_tasks_per_s, s.steals,
                    s.widened, s.narrowed);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%s,%d,%.4f,median,%.3f,%.3f,,,\n",
                  r.scenario.c_str(), r.policy.c_str(), r.hint, r.backend.c_str(), r.tasks,
                  r.dop, r.median_makespan_us, r.throughput_tasks_per_s);
    os << buf;
  }
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationReport>& reports) {
  os << "# taosched-ablation v1\n";
  os << "scenario,policy,hint,dop,throughput_no_molding,throughput_molding,delta_frac\n";
  char buf[256];
  for (const auto& a : reports) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.4f,%.3f,%.3f,%.5f\n", a.scenario.c_str(),
                  a.policy.c_str(), a.hint, a.dop, a.without_throughput, a.with_throughput,
                  a.delta_frac);
    os << buf;
  }
}

void emit_plot_data(std::ostream& os, const std::vector<SweepRow>& rows,
                    const std::string& scenario, const std::vector<std::string>& policies,
                    const std::vector<int>& hints) {
  os << "# taosched-bars v1 scenario=" << scenario << "\n";
  os << "policy,hint,throughput_tasks_per_s\n";
  for (const auto& policy : policies)
    for (int hint : hints) {
      const SweepRow* found = nullptr;
      for (const auto& r : rows)
        if (r.scenario == scenario && r.policy == policy && r.hint == hint) found = &r;
      os << policy << ',' << hint << ',';
      if (found) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", found->throughput_tasks_per_s);
        os << buf << '\n';
      } else {
        os << "NA\n";
      }
    }
}

void write_speedup_table(std::ostream& os, const std::vector<SweepRow>& rows,
                         const std::string& baseline_policy, int baseline_hint) {
  os << "# taosched-speedup v1 (baseline " << baseline_policy << " hint " << baseline_hint
     << ")\n";
  os << "scenario,hint,policy,speedup\n";
  for (const auto& r : rows) {
    const SweepRow* base = nullptr;
    for (const auto& b : rows)
      if (b.scenario == r.scenario && b.policy == baseline_policy && b.hint == baseline_hint)
        base = &b;
    os << r.scenario << ',' << r.hint << ',' << r.policy << ',';
    if (base && r.median_makespan_us > 0) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", base->median_makespan_us / r.median_makespan_us);
      os << buf << '\n';
    } else {
      os << "NA\n";
    }
  }
}

}  // namespace taosched
