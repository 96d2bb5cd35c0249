/* sim_backend.cpp -- deterministic discrete-event executor
 *
 * Cores park when they find no work and are woken by pushes, so the event
 * queue never carries polling events. Local pops are instant while a steal
 * costs a fixed inspection latency, so a queue owner beats thieves racing at
 * the same timestamp. All accounting is in integer nanoseconds: per-core
 * busy plus idle always equals the makespan exactly.
 */
#include <cmath>
#include <deque>
#include <queue>

#include "taosched/backend.hpp"

namespace taosched {

std::string to_string(Backend b) { return b == Backend::Sim ? "sim" : "native"; }

Backend backend_from_string(const std::string& s) {
  if (s == "sim") return Backend::Sim;
  if (s == "native") return Backend::Native;
  throw ConfigError("unknown backend '" + s + "' (expected sim or native)");
}

RunMetrics run_backend(Backend b, const TaoDag& dag, const MachineModel& model,
                       const RunOptions& opt) {
  return b == Backend::Sim ? run_simulated(dag, model, opt) : run_native(dag, model, opt);
}

namespace {

using Ns = std::int64_t;

// time spent inspecting remote queues before a steal lands
constexpr Ns kStealLatencyNs = 1000;

// chunks per member of a multi-core place; members pull chunks from a shared
// pool, so a late-arriving member finds the pool drained and exits at once
// instead of appending a full share. Contention factors are re-read at every
// chunk claim, so a task only pays for interference while it actually lasts.
constexpr int kChunksPerMember = 4;
constexpr int kMinChunks = 8;

enum class EventKind { ChunkEnd, Wake, StealScan };

struct Event {
  Ns time;
  std::uint64_t seq;
  CoreId core;
  EventKind kind;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

// per-task execution record; tasks run exactly once so task id indexes these
struct Instance {
  int width = 1;        // fixed at wakeup
  int load_cluster = 0; // cluster charged at wakeup, credited at commit
  bool pushed = false;
  bool done = false;
  Place place;          // derived from the dispatching core
  int workers_inside = 0;  // members currently running chunks
  int chunks_left = 0;   // shared work pool the members drain
  Ns nominal_left = 0;   // contention-free work remaining in the pool
  Ns first_enter = -1;
  double bw_demand = 0;  // bytes/s while resident
  double ws_bytes = 0;
};

struct Core {
  std::deque<int> ready;     // own pops from the back, thieves from the front
  std::deque<int> assembly;  // share handoff, strict FIFO
  bool busy = false;
  bool parked = true;
  int running_task = -1;
  Ns busy_since = 0;
  Ns idle_since = 0;
  Ns busy_ns = 0;
  Ns idle_ns = 0;
};

class Simulator {
 public:
  Simulator(const TaoDag& dag, const MachineModel& model, const RunOptions& opt)
      : dag_(dag), model_(model), opt_(opt), state_(model, opt.policy) {
    if (!dag.finalized()) throw StructuralError("dag must be finalized before running");
    if (!dag.criticality_assigned())
      throw StructuralError("criticality must be assigned before running");
    const int n = model.core_count();
    cores_.resize(static_cast<size_t>(n));
    ws_bytes_.assign(static_cast<size_t>(model.cluster_count()), 0.0);
    instances_.resize(dag.nodes().size());
    pending_.reserve(dag.nodes().size());
    for (const auto& node : dag.nodes()) pending_.push_back(node.pending_predecessors);
    rngs_.reserve(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) rngs_.emplace_back(mix_seed(opt.seed, 100 + static_cast<std::uint64_t>(c)));
    if (opt.ptt_preload) state_.ptt().preload(*opt.ptt_preload);
  }

  RunMetrics run() {
    const int n = model_.core_count();
    int rr = 0;
    for (int root : dag_.roots()) {
      push_task(root, rr % n);
      ++rr;
    }
    for (int c = 0; c < n; ++c) wake(c, 0);

    while (!events_.empty()) {
      Event ev = events_.top();
      events_.pop();
      now_ = ev.time;
      Core& core = cores_[static_cast<size_t>(ev.core)];
      if (ev.kind == EventKind::ChunkEnd) {
        if (claim_next_chunk(ev.core)) continue;  // stays busy on the same task
        finish_share(ev.core);
      } else if (core.busy) {
        continue;  // stale wake; the core will rescan when its share ends
      }
      scan_for_work(ev.core, /*steal_ready=*/ev.kind == EventKind::StealScan);
    }

    if (done_ != dag_.nodes().size()) {
      std::string diag = "scheduler stalled with " +
                         std::to_string(dag_.nodes().size() - done_) +
                         " tasks unfinished;";
      for (int c = 0; c < n; ++c) {
        const Core& core = cores_[static_cast<size_t>(c)];
        diag += " core" + std::to_string(c) + "(busy=" + std::to_string(core.busy) +
                ",ready=" + std::to_string(core.ready.size()) +
                ",shares=" + std::to_string(core.assembly.size()) + ")";
      }
      throw StructuralError(diag);
    }

    RunMetrics m;
    m.makespan_ns = now_;
    m.makespan_us = static_cast<double>(now_) / 1000.0;
    m.core_stats.resize(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
      Core& core = cores_[static_cast<size_t>(c)];
      core.idle_ns += now_ - core.idle_since;  // every core ends parked
      m.core_stats[static_cast<size_t>(c)] = {core.busy_ns, core.idle_ns};
    }
    m.tasks_executed = done_;
    m.steals = steals_;
    m.tasks_widened = widened_;
    m.tasks_narrowed = narrowed_;
    m.trace = std::move(trace_);
    m.decisions = std::move(decisions_);
    if (opt_.ptt_dump_out) *opt_.ptt_dump_out = state_.ptt().dump();
    return m;
  }

 private:
  void schedule(Ns t, CoreId core, EventKind kind) {
    events_.push(Event{t, seq_++, core, kind});
  }

  void wake(CoreId c, Ns t) {
    Core& core = cores_[static_cast<size_t>(c)];
    if (!core.parked) return;
    core.parked = false;
    schedule(t, c, EventKind::Wake);
  }

  // places a ready task on a queue; the placement policy already ran
  void push_task(int task, CoreId target) {
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    Instance& inst = instances_[static_cast<size_t>(task)];
    if (inst.pushed) throw StructuralError("task scheduled twice");
    inst.pushed = true;
    inst.width = choose_width(node, target, state_, opt_.policy);
    inst.load_cluster = model_.cluster_of(target);
    const int hint = std::min(node.resource_hint, model_.max_place_width(inst.load_cluster));
    if (inst.width > hint) ++widened_;
    if (inst.width < hint) ++narrowed_;
    state_.add_load(inst.load_cluster, inst.width);
    state_.task_scheduled(node.criticality);
    cores_[static_cast<size_t>(target)].ready.push_back(task);
    wake(target, now_);
    // a busy owner may sit on this for a while; parked cores can steal it
    for (int c = 0; c < model_.core_count(); ++c) wake(c, now_);
  }

  // pops have happened; build the place around the executing core and hand
  // shares to every member
  void dispatch(int task, CoreId core) {
    Instance& inst = instances_[static_cast<size_t>(task)];
    const int ci = model_.cluster_of(core);
    const int w = std::min(inst.width, model_.max_place_width(ci));
    const CoreId leader = leader_core(core, w);
    inst.place = Place{leader, w};
    for (CoreId c = leader; c < leader + w; ++c) {
      cores_[static_cast<size_t>(c)].assembly.push_back(task);
      wake(c, now_);
    }
  }

  // interference multiplier for one chunk at the current registry state
  double contention_factor(int task) const {
    const Instance& inst = instances_[static_cast<size_t>(task)];
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    if (inst.bw_demand > 0 && model_.memory_bandwidth_cap > 0)
      return std::max(1.0, bw_demand_ / model_.memory_bandwidth_cap);
    if (model_.cache_penalty_enabled) {
      const int ci = model_.cluster_of(inst.place.leader);
      return cache_penalty_factor(node.type, ws_bytes_[static_cast<size_t>(ci)], ci, model_);
    }
    return 1.0;
  }

  // claims one chunk: an even split of the remaining pool, inflated by the
  // contention in effect right now. Splitting the remainder keeps the
  // no-contention sum exactly equal to the task's nominal time.
  Ns claim_chunk(int task) {
    Instance& inst = instances_[static_cast<size_t>(task)];
    const Ns nominal = inst.nominal_left / inst.chunks_left;
    inst.nominal_left -= nominal;
    --inst.chunks_left;
    Ns d = std::llround(static_cast<double>(nominal) * contention_factor(task));
    return std::max<Ns>(1, d);
  }

  // returns false when the pool was already drained: a late member skips the
  // task outright and never counts as a participant
  bool enter_share(int task, CoreId c) {
    Instance& inst = instances_[static_cast<size_t>(task)];
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    if (inst.first_enter < 0) {
      inst.first_enter = now_;
      const auto& prof = model_.profile(node.type);
      TimeUs nominal = nominal_task_time(node.type, inst.place, model_);
      if (prof.bytes_streamed > 0)
        inst.bw_demand = prof.bytes_streamed / (nominal * 1e-6);
      else if (model_.cache_penalty_enabled)
        inst.ws_bytes = prof.working_set_bytes;
      inst.nominal_left = std::llround(nominal * 1000.0) * inst.place.width;
      inst.chunks_left = std::max(kMinChunks, kChunksPerMember * inst.place.width);
      bw_demand_ += inst.bw_demand;
      ws_bytes_[static_cast<size_t>(model_.cluster_of(inst.place.leader))] += inst.ws_bytes;
    }
    if (inst.chunks_left == 0) return false;
    Core& core = cores_[static_cast<size_t>(c)];
    core.idle_ns += now_ - core.idle_since;
    core.busy = true;
    core.busy_since = now_;
    core.running_task = task;
    ++inst.workers_inside;
    schedule(now_ + claim_chunk(task), c, EventKind::ChunkEnd);
    return true;
  }

  // a member that finished a chunk keeps pulling from the pool until it runs
  // dry; true while the core stays busy
  bool claim_next_chunk(CoreId c) {
    Core& core = cores_[static_cast<size_t>(c)];
    Instance& inst = instances_[static_cast<size_t>(core.running_task)];
    if (inst.chunks_left == 0) return false;
    schedule(now_ + claim_chunk(core.running_task), c, EventKind::ChunkEnd);
    return true;
  }

  // a member only leaves once the pool is dry, so the last worker out is the
  // one that completed the execution; it runs the commit
  void finish_share(CoreId c) {
    Core& core = cores_[static_cast<size_t>(c)];
    const int task = core.running_task;
    Instance& inst = instances_[static_cast<size_t>(task)];
    core.busy_ns += now_ - core.busy_since;
    core.busy = false;
    core.running_task = -1;
    core.idle_since = now_;
    if (--inst.workers_inside == 0) commit(task, c);
  }

  // the last core out retires the task: time feedback, tracker updates,
  // then successor wakeups
  void commit(int task, CoreId c) {
    Instance& inst = instances_[static_cast<size_t>(task)];
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    inst.done = true;
    ++done_;
    const Ns elapsed = now_ - inst.first_enter;
    state_.ptt().table(node.type).record(inst.place.leader, inst.place.width,
                                         static_cast<double>(elapsed) / 1000.0);
    bw_demand_ -= inst.bw_demand;
    ws_bytes_[static_cast<size_t>(model_.cluster_of(inst.place.leader))] -= inst.ws_bytes;
    state_.task_finished(node.criticality);
    state_.remove_load(inst.load_cluster, inst.width);
    if (opt_.record_trace)
      trace_.push_back(TraceEntry{task, node.type, inst.place.leader, inst.place.width,
                                  node.criticality,
                                  static_cast<double>(inst.first_enter) / 1000.0,
                                  static_cast<double>(now_) / 1000.0});
    int woken = 0;
    for (int s : node.successors)
      if (--pending_[static_cast<size_t>(s)] == 0) wake_successor(s, c, woken++);
  }

  void wake_successor(int task, CoreId completing_core, int successor_index) {
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    WakeupContext ctx{completing_core, successor_index};
    PlacementResult pr =
        choose_core(node, ctx, state_, opt_.policy, rngs_[static_cast<size_t>(completing_core)]);
    push_task(task, pr.target_core);
    if (opt_.record_decisions)
      decisions_.push_back(PlacementDecision{task, node.criticality, pr.max_running_crit,
                                             pr.critical, pr.to_big, pr.target_core,
                                             instances_[static_cast<size_t>(task)].width});
  }

  // steal_ready is true when the caller already waited out the steal
  // latency; a fresh scan that only finds remote work schedules a StealScan
  // instead of taking it at once
  void scan_for_work(CoreId c, bool steal_ready) {
    Core& core = cores_[static_cast<size_t>(c)];
    while (true) {
      if (!core.assembly.empty()) {
        int task = core.assembly.front();
        core.assembly.pop_front();
        if (enter_share(task, c)) return;
        continue;  // drained pool, instant exit: keep looking for work
      }
      if (!core.ready.empty()) {
        int task = core.ready.back();
        core.ready.pop_back();
        dispatch(task, c);
        continue;  // the dispatcher is always a member, so the next pass enters
      }
      std::vector<CoreId> victims;
      for (int v = 0; v < model_.core_count(); ++v)
        if (v != c && !cores_[static_cast<size_t>(v)].ready.empty()) victims.push_back(v);
      if (!victims.empty()) {
        if (!steal_ready) {
          schedule(now_ + kStealLatencyNs, c, EventKind::StealScan);
          return;  // stay unparked; the pending scan keeps the core driven
        }
        CoreId v = rngs_[static_cast<size_t>(c)].pick(victims);
        int task = cores_[static_cast<size_t>(v)].ready.front();
        cores_[static_cast<size_t>(v)].ready.pop_front();
        ++steals_;
        dispatch(task, c);
        steal_ready = false;
        continue;
      }
      core.parked = true;
      return;
    }
  }

  const TaoDag& dag_;
  const MachineModel& model_;
  const RunOptions& opt_;
  SchedulerState state_;
  std::vector<Core> cores_;
  std::vector<Instance> instances_;
  std::vector<int> pending_;
  std::vector<Rng> rngs_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::uint64_t seq_ = 0;
  Ns now_ = 0;
  std::size_t done_ = 0;
  std::size_t steals_ = 0;
  std::size_t widened_ = 0;
  std::size_t narrowed_ = 0;
  double bw_demand_ = 0;
  std::vector<double> ws_bytes_;  // resident working-set sum per cluster
  std::vector<TraceEntry> trace_;
  std::vector<PlacementDecision> decisions_;
};

}  // namespace

RunMetrics run_simulated(const TaoDag& dag, const MachineModel& model, const RunOptions& opt) {
  model.validate();
  return Simulator(dag, model, opt).run();
}

}  // namespace taosched
