/* bench_cli.cpp -- taobench: generate DAGs, run policy sweeps, ablate molding */
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "taosched/backend.hpp"
#include "taosched/kernels.hpp"
#include "taosched/scenario.hpp"

namespace ts = taosched;

namespace {

// flags shared by every verb that needs a graph
struct DagArgs {
  std::string dag_file;
  int tasks = 3000;
  double mean_width = 2.0;
  int max_width = 0;
  double extra_edge_prob = 0.2;
  int max_extra_preds = 2;
  double frac_copy = 1.0 / 3;
  double frac_sort = 1.0 / 3;
  double frac_matmul = 1.0 / 3;
  double frac_synthetic = 0.0;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dag", dag_file, "read the DAG from a JSON file instead of generating");
    cmd->add_option("-n,--tasks", tasks, "number of tasks to generate");
    cmd->add_option("--mean-width", mean_width, "mean layer width, controls parallelism");
    cmd->add_option("--max-width", max_width, "cap on layer width (0 = uncapped)");
    cmd->add_option("--extra-edge-prob", extra_edge_prob, "chance of each optional extra edge");
    cmd->add_option("--max-extra-preds", max_extra_preds, "extra predecessors drawn per node");
    cmd->add_option("--frac-copy", frac_copy, "fraction of copy tasks");
    cmd->add_option("--frac-sort", frac_sort, "fraction of sort tasks");
    cmd->add_option("--frac-matmul", frac_matmul, "fraction of matmul tasks");
    cmd->add_option("--frac-synthetic", frac_synthetic, "fraction of synthetic tasks");
    cmd->add_option("--seed", seed, "graph generator seed");
  }

  ts::Scenario scenario() const {
    ts::Scenario sc;
    sc.n_tasks = tasks;
    sc.shape.mean_layer_width = mean_width;
    sc.shape.max_layer_width = max_width;
    sc.shape.extra_edge_prob = extra_edge_prob;
    sc.shape.max_extra_preds = max_extra_preds;
    sc.mix = ts::TypeMix{frac_copy, frac_sort, frac_matmul, frac_synthetic};
    sc.dag_seed = seed;
    return sc;
  }

  ts::TaoDag load_or_generate() const {
    if (!dag_file.empty()) return ts::load_dag(dag_file);
    const ts::Scenario sc = scenario();
    return ts::generate_random_dag(sc.n_tasks, sc.mix, sc.shape, sc.dag_seed);
  }
};

struct ModelArgs {
  std::string model_file;
  std::string backend = "sim";
  bool oversubscribe = false;
  bool cache_penalty = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model_file, "machine model JSON (default: built-in hikey960-like)");
    cmd->add_option("--backend", backend, "sim or native")
        ->check(CLI::IsMember({"sim", "native"}));
    cmd->add_flag("--oversubscribe", oversubscribe,
                  "native: keep one worker per model core even if the host has fewer");
    cmd->add_flag("--cache-penalty", cache_penalty,
                  "sim: enable the shared-cache working-set interference penalty");
  }

  ts::MachineModel load() const {
    ts::MachineModel m =
        model_file.empty() ? ts::default_hikey_like() : ts::load_model(model_file);
    if (cache_penalty) m.cache_penalty_enabled = true;
    return m;
  }
};

// halve clusters until the model fits the host; big/LITTLE structure survives
// as long as at least two host cores exist
ts::MachineModel shrink_to_host(const ts::MachineModel& in, int host_cores) {
  ts::MachineModel m = in;
  while (m.core_count() > host_cores) {
    bool shrunk = false;
    for (auto& c : m.clusters)
      if (m.core_count() > host_cores && c.core_count > 1) {
        c.core_count /= 2;
        shrunk = true;
      }
    if (!shrunk) {
      // every cluster is a single core: drop the slowest ones
      while (m.core_count() > host_cores && m.clusters.size() > 1) {
        size_t slow = 0;
        for (size_t i = 1; i < m.clusters.size(); ++i)
          if (m.clusters[i].speed < m.clusters[slow].speed) slow = i;
        m.clusters.erase(m.clusters.begin() + static_cast<std::ptrdiff_t>(slow));
      }
      break;
    }
  }
  int first = 0;
  for (auto& c : m.clusters) {
    c.first_core = first;
    first += c.core_count;
  }
  m.validate();
  return m;
}

ts::MachineModel effective_model(const ModelArgs& margs) {
  ts::MachineModel m = margs.load();
  if (margs.backend != "native") return m;
  const int host = static_cast<int>(std::thread::hardware_concurrency());
  if (host > 0 && host != m.core_count()) {
    if (host < m.core_count() && !margs.oversubscribe) {
      ts::MachineModel shrunk = shrink_to_host(m, host);
      std::cerr << "warning: host has " << host << " cores but the model has "
                << m.core_count() << "; scaling the model down to " << shrunk.core_count()
                << " cores (use --oversubscribe to keep the full model)\n";
      return shrunk;
    }
    std::cerr << "warning: host core count (" << host << ") differs from the model ("
              << m.core_count() << "); native timings will be noisy\n";
  }
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ts::ConfigError("cannot write " + path);
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taobench: moldable-task scheduling testbench"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "generate a random DAG and save it as JSON");
  DagArgs gen_dag;
  gen_dag.attach(gen);
  std::string gen_out;
  std::string gen_dot;
  int gen_hint = 1;
  gen->add_option("-o,--out", gen_out, "output JSON path")->required();
  gen->add_option("--dot", gen_dot, "also write GraphViz output here");
  gen->add_option("--hint", gen_hint, "resource hint applied to every node");

  // ---- export-dot ----
  auto* dot = app.add_subcommand("export-dot", "render a DAG JSON file as GraphViz");
  std::string dot_in, dot_out;
  dot->add_option("--dag", dot_in, "input DAG JSON")->required();
  dot->add_option("-o,--out", dot_out, "output .dot path")->required();

  // ---- run ----
  auto* run = app.add_subcommand("run", "sweep policies x hints over one DAG");
  DagArgs run_dag;
  run_dag.attach(run);
  ModelArgs run_model;
  run_model.attach(run);
  std::vector<std::string> run_policies;
  std::vector<int> run_hints = {1, 4};
  int run_reps = 5;
  std::uint64_t run_seed = 7;
  double run_scale = 1.0;
  std::string run_out, run_plot, run_speedup;
  std::string run_baseline = "homogeneous";
  int run_baseline_hint = 1;
  run->add_option("--policy", run_policies, "policies to run (default: all canonical)");
  run->add_option("--hint", run_hints, "resource hints to sweep");
  run->add_option("--reps", run_reps, "repetitions per cell (median reported)");
  run->add_option("--run-seed", run_seed, "scheduling seed base");
  run->add_option("--work-scale", run_scale, "native kernel work multiplier");
  run->add_option("-o,--out", run_out, "results CSV path (default: stdout)");
  run->add_option("--plot", run_plot, "write grouped-bar plot data here");
  run->add_option("--speedup", run_speedup, "write speedup table here");
  run->add_option("--baseline-policy", run_baseline, "speedup baseline policy");
  run->add_option("--baseline-hint", run_baseline_hint, "speedup baseline hint");

  // ---- ablate ----
  auto* abl = app.add_subcommand("ablate", "compare molding on/off at the best base hint");
  DagArgs abl_dag;
  abl_dag.attach(abl);
  ModelArgs abl_model;
  abl_model.attach(abl);
  std::vector<std::string> abl_policies = {"weight", "crit-ptt"};
  std::vector<int> abl_hints = {1, 4};
  int abl_reps = 5;
  std::uint64_t abl_seed = 7;
  double abl_scale = 1.0;
  std::string abl_out;
  abl->add_option("--policy", abl_policies, "policies to ablate");
  abl->add_option("--hint", abl_hints, "candidate base hints");
  abl->add_option("--reps", abl_reps, "repetitions per cell");
  abl->add_option("--run-seed", abl_seed, "scheduling seed base");
  abl->add_option("--work-scale", abl_scale, "native kernel work multiplier");
  abl->add_option("-o,--out", abl_out, "ablation CSV path (default: stdout)");

  // ---- dump-ptt ----
  auto* dump = app.add_subcommand("dump-ptt", "run once and dump the learned tables");
  DagArgs dump_dag;
  dump_dag.attach(dump);
  ModelArgs dump_model;
  dump_model.attach(dump);
  std::string dump_policy = "crit-ptt";
  int dump_hint = 1;
  std::uint64_t dump_seed = 7;
  double dump_scale = 1.0;
  std::string dump_out, dump_preload, dump_trace;
  dump->add_option("--policy", dump_policy, "policy to run");
  dump->add_option("--hint", dump_hint, "resource hint for every node");
  dump->add_option("--run-seed", dump_seed, "scheduling seed");
  dump->add_option("--work-scale", dump_scale, "native kernel work multiplier");
  dump->add_option("-o,--out", dump_out, "PTT CSV path")->required();
  dump->add_option("--preload", dump_preload, "warm-start tables from this PTT CSV");
  dump->add_option("--trace", dump_trace, "also write the schedule trace here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      ts::TaoDag dag = gen_dag.load_or_generate();
      ts::set_uniform_hint(dag, gen_hint);
      ts::save_dag(dag, gen_out);
      if (!gen_dot.empty()) write_text(gen_dot, ts::export_dot(dag));
      std::cout << "wrote " << dag.node_count() << " tasks to " << gen_out
                << " (DoP " << ts::degree_of_parallelism(dag) << ")\n";
    } else if (*dot) {
      ts::TaoDag dag = ts::load_dag(dot_in);
      write_text(dot_out, ts::export_dot(dag));
      std::cout << "wrote " << dot_out << "\n";
    } else if (*run) {
      ts::Scenario sc = run_dag.scenario();
      ts::SweepConfig cfg;
      cfg.policies = run_policies;
      cfg.hints = run_hints;
      cfg.reps = run_reps;
      cfg.backend = ts::backend_from_string(run_model.backend);
      cfg.run_seed = run_seed;
      cfg.native_work_scale = run_scale;
      ts::MachineModel model = effective_model(run_model);
      std::vector<ts::SweepRow> rows;
      if (!run_dag.dag_file.empty()) {
        ts::TaoDag base = ts::load_dag(run_dag.dag_file);
        rows = ts::run_sweep_on(base, run_dag.dag_file, model, cfg);
      } else {
        rows = ts::run_sweep(sc, model, cfg);
      }
      if (run_out.empty()) {
        ts::write_results_csv(std::cout, rows);
      } else {
        auto f = open_out(run_out);
        ts::write_results_csv(f, rows);
        std::cout << "wrote " << rows.size() << " cells to " << run_out << "\n";
      }
      if (!run_plot.empty()) {
        auto f = open_out(run_plot);
        ts::emit_plot_data(f, rows, rows.empty() ? sc.name : rows.front().scenario,
                           cfg.policies.empty() ? ts::canonical_policy_names() : cfg.policies,
                           cfg.hints);
      }
      if (!run_speedup.empty()) {
        auto f = open_out(run_speedup);
        ts::write_speedup_table(f, rows, run_baseline, run_baseline_hint);
      }
    } else if (*abl) {
      ts::Scenario sc = abl_dag.scenario();
      if (!abl_dag.dag_file.empty())
        throw ts::ConfigError("ablate works on generated scenarios; pass generator flags");
      ts::SweepConfig cfg;
      cfg.hints = abl_hints;
      cfg.reps = abl_reps;
      cfg.backend = ts::backend_from_string(abl_model.backend);
      cfg.run_seed = abl_seed;
      cfg.native_work_scale = abl_scale;
      ts::MachineModel model = effective_model(abl_model);
      auto reports = ts::ablate_molding(sc, model, cfg, abl_policies);
      if (abl_out.empty()) {
        ts::write_ablation_csv(std::cout, reports);
      } else {
        auto f = open_out(abl_out);
        ts::write_ablation_csv(f, reports);
        std::cout << "wrote " << reports.size() << " rows to " << abl_out << "\n";
      }
    } else if (*dump) {
      ts::TaoDag dag = dump_dag.load_or_generate();
      ts::set_uniform_hint(dag, dump_hint);
      ts::MachineModel model = effective_model(dump_model);
      ts::RunOptions opt;
      opt.policy = ts::policy_config_from_name(dump_policy);
      opt.seed = dump_seed;
      opt.native_work_scale = dump_scale;
      opt.record_trace = !dump_trace.empty();
      std::vector<ts::PttDumpRow> dump_rows;
      opt.ptt_dump_out = &dump_rows;
      std::vector<ts::PttDumpRow> preload_rows;
      if (!dump_preload.empty()) {
        std::ifstream pf(dump_preload);
        if (!pf) throw ts::ConfigError("cannot read " + dump_preload);
        preload_rows = ts::load_ptt_csv(pf);
        opt.ptt_preload = &preload_rows;
      }
      ts::RunMetrics m =
          ts::run_backend(ts::backend_from_string(dump_model.backend), dag, model, opt);
      {
        auto f = open_out(dump_out);
        ts::dump_ptt_csv(f, dump_rows);
      }
      if (!dump_trace.empty()) {
        auto f = open_out(dump_trace);
        ts::write_trace_csv(f, m.trace);
      }
      std::cout << "makespan " << m.makespan_us << " us, " << m.tasks_executed
                << " tasks, " << dump_rows.size() << " table cells -> " << dump_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
