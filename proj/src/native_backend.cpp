/* native_backend.cpp -- one thread per model core, real kernels
 *
 * Functional twin of the simulator: same policies, same queue discipline,
 * wall-clock timings. Heterogeneity is emulated by padding shares on slow
 * clusters. Every wait is a yield loop so the backend stays live even when
 * the host has fewer cores than the model.
 */
#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>

#include "taosched/backend.hpp"
#include "taosched/kernels.hpp"

namespace taosched {

namespace {

using Clock = std::chrono::steady_clock;
using Ns = std::int64_t;

struct NInstance {
  std::atomic<bool> pushed{false};
  int width = 1;
  int load_cluster = 0;
  Place place;
  std::unique_ptr<KernelTask> kernel;
  std::atomic<int> next_member{0};
  std::atomic<int> exits_left{0};
  std::atomic<Ns> first_enter{-1};
};

struct NCore {
  std::mutex mu;
  std::deque<int> ready;
  std::deque<int> assembly;
  Ns busy_ns = 0;  // only its own thread writes
};

class NativeRun {
 public:
  NativeRun(const TaoDag& dag, const MachineModel& model, const RunOptions& opt)
      : dag_(dag), model_(model), opt_(opt), state_(model, opt.policy) {
    if (!dag.finalized()) throw StructuralError("dag must be finalized before running");
    if (!dag.criticality_assigned())
      throw StructuralError("criticality must be assigned before running");
    const int n = model.core_count();
    cores_ = std::vector<NCore>(static_cast<size_t>(n));
    instances_ = std::vector<NInstance>(dag.nodes().size());
    pending_ = std::vector<std::atomic<int>>(dag.nodes().size());
    for (size_t i = 0; i < dag.nodes().size(); ++i)
      pending_[i].store(dag.nodes()[i].pending_predecessors, std::memory_order_relaxed);
    max_speed_ = 0;
    for (const auto& c : model.clusters) max_speed_ = std::max(max_speed_, c.speed);
    rngs_.reserve(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c)
      rngs_.push_back(std::make_unique<Rng>(mix_seed(opt.seed, 100 + static_cast<std::uint64_t>(c))));
    if (opt.ptt_preload) state_.ptt().preload(*opt.ptt_preload);
  }

  RunMetrics run() {
    const int n = model_.core_count();
    t0_ = Clock::now();
    int rr = 0;
    for (int root : dag_.roots()) push_task(root, rr++ % n);

    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) threads.emplace_back([this, c] { worker(c); });
    for (auto& t : threads) t.join();

    if (!error_.empty()) throw DomainError(error_);
    if (done_.load() != dag_.nodes().size())
      throw StructuralError("native run stalled with " +
                            std::to_string(dag_.nodes().size() - done_.load()) +
                            " tasks unfinished");

    RunMetrics m;
    m.makespan_ns = makespan_ns_.load();
    m.makespan_us = static_cast<double>(m.makespan_ns) / 1000.0;
    m.core_stats.resize(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
      Ns busy = cores_[static_cast<size_t>(c)].busy_ns;
      m.core_stats[static_cast<size_t>(c)] = {busy, m.makespan_ns - busy};
    }
    m.tasks_executed = done_.load();
    m.steals = steals_.load();
    m.tasks_widened = widened_.load();
    m.tasks_narrowed = narrowed_.load();
    m.trace = std::move(trace_);
    m.decisions = std::move(decisions_);
    if (opt_.ptt_dump_out) *opt_.ptt_dump_out = state_.ptt().dump();
    return m;
  }

 private:
  Ns now_ns() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0_).count();
  }

  void fail(const std::string& what) {
    std::lock_guard<std::mutex> lk(shared_mu_);
    if (error_.empty()) error_ = what;
    aborted_.store(true, std::memory_order_release);
  }

  void push_task(int task, CoreId target) {
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    NInstance& inst = instances_[static_cast<size_t>(task)];
    if (inst.pushed.exchange(true)) {
      fail("task scheduled twice");
      return;
    }
    inst.width = choose_width(node, target, state_, opt_.policy);
    inst.load_cluster = model_.cluster_of(target);
    const int hint = std::min(node.resource_hint, model_.max_place_width(inst.load_cluster));
    if (inst.width > hint) widened_.fetch_add(1, std::memory_order_relaxed);
    if (inst.width < hint) narrowed_.fetch_add(1, std::memory_order_relaxed);
    state_.add_load(inst.load_cluster, inst.width);
    state_.task_scheduled(node.criticality);
    NCore& core = cores_[static_cast<size_t>(target)];
    std::lock_guard<std::mutex> lk(core.mu);
    core.ready.push_back(task);
  }

  // build the place around the executing core, materialize the kernel, and
  // hand a share to every member
  void dispatch(int task, CoreId core) {
    NInstance& inst = instances_[static_cast<size_t>(task)];
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    const int ci = model_.cluster_of(core);
    const int w = std::min(inst.width, model_.max_place_width(ci));
    inst.place = Place{leader_core(core, w), w};
    inst.kernel =
        std::make_unique<KernelTask>(node.type, node.work, w, opt_.native_work_scale);
    inst.exits_left.store(w, std::memory_order_release);
    for (CoreId c = inst.place.leader; c < inst.place.end(); ++c) {
      NCore& member = cores_[static_cast<size_t>(c)];
      std::lock_guard<std::mutex> lk(member.mu);
      member.assembly.push_back(task);
    }
  }

  void run_share(int task, CoreId c) {
    NInstance& inst = instances_[static_cast<size_t>(task)];
    const int member = inst.next_member.fetch_add(1, std::memory_order_acq_rel);
    if (member >= inst.place.width) {
      fail("more shares than place width");
      return;
    }
    const Ns start = now_ns();
    Ns expected = -1;
    inst.first_enter.compare_exchange_strong(expected, start);

    inst.kernel->run_share(member);

    // slow-cluster emulation: stretch the share to what the model core
    // would have needed
    const double speed = model_.cluster(model_.cluster_of(c)).speed;
    if (speed < max_speed_) {
      const Ns real = now_ns() - start;
      const Ns target = static_cast<Ns>(static_cast<double>(real) * (max_speed_ / speed));
      while (now_ns() - start < target) std::this_thread::yield();
    }

    const Ns end = now_ns();
    cores_[static_cast<size_t>(c)].busy_ns += end - start;
    Ns seen = makespan_ns_.load(std::memory_order_relaxed);
    while (end > seen && !makespan_ns_.compare_exchange_weak(seen, end)) {
    }
    if (inst.exits_left.fetch_sub(1, std::memory_order_acq_rel) == 1) commit(task, c, end);
  }

  void commit(int task, CoreId c, Ns end) {
    NInstance& inst = instances_[static_cast<size_t>(task)];
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    KernelResult kr = inst.kernel->validate();
    if (!kr.valid) {
      fail("task " + std::to_string(task) + " (" + to_string(node.type) +
           ") failed validation: " + kr.what);
      done_.fetch_add(1);
      return;
    }
    const Ns elapsed = end - inst.first_enter.load(std::memory_order_acquire);
    state_.ptt().table(node.type).record(inst.place.leader, inst.place.width,
                                         static_cast<double>(elapsed) / 1000.0);
    state_.task_finished(node.criticality);
    state_.remove_load(inst.load_cluster, inst.width);
    inst.kernel.reset();  // free buffers before the successors allocate theirs
    if (opt_.record_trace) {
      std::lock_guard<std::mutex> lk(shared_mu_);
      trace_.push_back(TraceEntry{
          task, node.type, inst.place.leader, inst.place.width, node.criticality,
          static_cast<double>(inst.first_enter.load()) / 1000.0,
          static_cast<double>(end) / 1000.0});
    }
    int woken = 0;
    for (int s : node.successors)
      if (pending_[static_cast<size_t>(s)].fetch_sub(1, std::memory_order_acq_rel) == 1)
        wake_successor(s, c, woken++);
    done_.fetch_add(1, std::memory_order_release);
  }

  void wake_successor(int task, CoreId completing_core, int successor_index) {
    const TaoNode& node = dag_.nodes()[static_cast<size_t>(task)];
    WakeupContext ctx{completing_core, successor_index};
    PlacementResult pr = choose_core(node, ctx, state_, opt_.policy,
                                     rng_of(completing_core));
    push_task(task, pr.target_core);
    if (opt_.record_decisions) {
      std::lock_guard<std::mutex> lk(shared_mu_);
      decisions_.push_back(PlacementDecision{task, node.criticality, pr.max_running_crit,
                                             pr.critical, pr.to_big, pr.target_core,
                                             instances_[static_cast<size_t>(task)].width});
    }
  }

  Rng& rng_of(CoreId c) { return *rngs_[static_cast<size_t>(c)]; }

  void worker(CoreId c) {
    NCore& core = cores_[static_cast<size_t>(c)];
    Rng& rng = rng_of(c);
    const int n = model_.core_count();
    const auto deadline = Clock::now() + std::chrono::seconds(300);
    while (done_.load(std::memory_order_acquire) < dag_.nodes().size() &&
           !aborted_.load(std::memory_order_acquire)) {
      int task = -1;
      bool from_assembly = false;
      {
        std::lock_guard<std::mutex> lk(core.mu);
        if (!core.assembly.empty()) {
          task = core.assembly.front();
          core.assembly.pop_front();
          from_assembly = true;
        } else if (!core.ready.empty()) {
          task = core.ready.back();
          core.ready.pop_back();
        }
      }
      if (task >= 0) {
        if (from_assembly) {
          run_share(task, c);
        } else {
          dispatch(task, c);  // the dispatcher picks its own share up next pass
        }
        continue;
      }
      if (n > 1) {
        CoreId v = (c + 1 + rng.uniform_int(0, n - 2)) % n;
        NCore& victim = cores_[static_cast<size_t>(v)];
        std::lock_guard<std::mutex> lk(victim.mu);
        if (!victim.ready.empty()) {
          task = victim.ready.front();
          victim.ready.pop_front();
        }
      }
      if (task >= 0) {
        steals_.fetch_add(1, std::memory_order_relaxed);
        dispatch(task, c);
        continue;
      }
      if (Clock::now() > deadline) {
        fail("native watchdog expired");
        return;
      }
      std::this_thread::yield();
    }
  }

  const TaoDag& dag_;
  const MachineModel& model_;
  const RunOptions& opt_;
  SchedulerState state_;
  std::vector<NCore> cores_;
  std::vector<NInstance> instances_;
  std::vector<std::atomic<int>> pending_;
  std::vector<std::unique_ptr<Rng>> rngs_;
  double max_speed_ = 1.0;
  Clock::time_point t0_;
  std::atomic<std::size_t> done_{0};
  std::atomic<std::size_t> steals_{0};
  std::atomic<std::size_t> widened_{0};
  std::atomic<std::size_t> narrowed_{0};
  std::atomic<Ns> makespan_ns_{0};
  std::atomic<bool> aborted_{false};
  std::mutex shared_mu_;
  std::string error_;
  std::vector<TraceEntry> trace_;
  std::vector<PlacementDecision> decisions_;
};

}  // namespace

RunMetrics run_native(const TaoDag& dag, const MachineModel& model, const RunOptions& opt) {
  model.validate();
  return NativeRun(dag, model, opt).run();
}

}  // namespace taosched
