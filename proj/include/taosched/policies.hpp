/* policies.hpp -- placement policies, molding, and shared scheduler state */
#pragma once

#include <atomic>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "taosched/dag.hpp"
#include "taosched/machine.hpp"
#include "taosched/ptt.hpp"
#include "taosched/types.hpp"

namespace taosched {

enum class PolicySpec { Homogeneous, CritAware, CritPtt, Weight };

std::string to_string(PolicySpec p);

struct Tunables {
  double init_weight_threshold = 1.5;
  // threshold update keeps this many parts of history per one part of the
  // new observation
  double threshold_history_weight = 6.0;
  double ewma_old_weight = 4.0;
};

struct PolicyConfig {
  PolicySpec spec = PolicySpec::Homogeneous;
  bool molding = false;
  // compare candidate cost against cost at the current width instead of the
  // raw time at the current width
  bool mold_cost_symmetric = false;
  Tunables tun;
};

// Canonical named configurations used by the benchmark sweeps. Accepts:
// homogeneous, crit-aware, crit-ptt, weight, mold.
PolicyConfig policy_config_from_name(const std::string& name);
std::vector<std::string> canonical_policy_names();

// State shared by every worker during one run: the performance trace tables,
// the running-criticality tracker, in-flight load counters, and the adaptive
// weight thresholds. All operations are safe to call concurrently.
class SchedulerState {
 public:
  SchedulerState(const MachineModel& model, const PolicyConfig& cfg);

  SchedulerState(const SchedulerState&) = delete;
  SchedulerState& operator=(const SchedulerState&) = delete;

  // the criticality tracker covers the window from scheduling to completion
  void task_scheduled(int criticality);
  void task_finished(int criticality);
  // highest criticality among tasks currently scheduled or running, 0 when
  // none are in flight
  int max_running_criticality() const;

  // load covers tasks that are scheduled or running; width counts once per
  // occupied core
  void add_load(int cluster_idx, int width);
  void remove_load(int cluster_idx, int width);
  int total_load() const;
  int cluster_load(int cluster_idx) const;

  // single system-wide threshold shared by every task type
  double weight_threshold() const;
  // folds a fresh big/LITTLE ratio into the threshold
  void observe_weight(double ratio);

  PttStore& ptt() { return ptt_; }
  const PttStore& ptt() const { return ptt_; }

  const MachineModel& model() const { return model_; }

 private:
  const MachineModel& model_;
  PttStore ptt_;

  mutable std::mutex crit_mu_;
  std::vector<int> crit_counts_;
  int crit_max_ = 0;

  std::atomic<int> total_load_{0};
  std::vector<std::atomic<int>> cluster_load_;

  double threshold_history_weight_;
  std::atomic<double> threshold_;
};

struct WakeupContext {
  // core whose worker is dispatching the successor; roots never reach the
  // policy, they are round-robined by the backend
  CoreId completing_core = 0;
  // position among the siblings woken by the same parent
  int successor_index = 0;
};

struct PlacementResult {
  CoreId target_core = 0;
  bool critical = false;      // the policy's own verdict, for auditing
  bool to_big = false;
  int max_running_crit = 0;  // tracker value the policy compared against
};

// Picks the queue a ready task is pushed to. Does not touch load counters.
PlacementResult choose_core(const TaoNode& node, const WakeupContext& ctx,
                            SchedulerState& state, const PolicyConfig& cfg, Rng& rng);

// Final width for a task headed to target_core's cluster: the resource hint
// clamped to the cluster, then optionally molded. Returns a width that is a
// power of two and at most the cluster's largest place width.
int choose_width(const TaoNode& node, CoreId target_core, SchedulerState& state,
                 const PolicyConfig& cfg);

// big/LITTLE execution time ratio for the type, preferring a measurement at
// prefer_width and falling back to any width measured on both clusters
std::optional<double> measured_weight(const PttStore& ptt, TaskType t,
                                      const MachineModel& model, int prefer_width);

}  // namespace taosched
