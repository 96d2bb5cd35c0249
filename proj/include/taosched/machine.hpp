/* machine.hpp -- clustered heterogeneous machine model and task-time law */
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "taosched/types.hpp"

namespace taosched {

struct ClusterSpec {
  std::string name;     // e.g. "big", "LITTLE"
  CoreId first_core = 0;
  int core_count = 0;   // contiguous [first_core, first_core + core_count)
  double speed = 1.0;   // relative to the reference core
  double cache_bytes = 0;  // cluster-shared cache; used by the penalty model
};

struct KernelProfile {
  TimeUs base_time_us = 0;  // width-1 time on a speed-1.0 core, uncontended
  // efficiency[cluster][width_index], width_index = log2(width); values in (0, 1].
  // Folds both the kernel's cluster affinity and its width scaling.
  std::vector<std::vector<double>> efficiency;
  double bytes_streamed = 0;     // memory traffic per task; 0 = not streaming
  double working_set_bytes = 0;  // for the optional shared-cache penalty
};

struct MachineModel {
  std::string name = "machine";
  std::vector<ClusterSpec> clusters;
  double memory_bandwidth_cap = 0;  // bytes/s shared by streaming tasks; 0 = uncapped
  std::array<std::optional<KernelProfile>, kNumTaskTypes> profiles;

  // optional working-set interference penalty for cache-resident kernels,
  // charged against each cluster's own shared cache
  bool cache_penalty_enabled = false;

  int core_count() const;
  int cluster_of(CoreId core) const;
  const ClusterSpec& cluster(int idx) const { return clusters[static_cast<size_t>(idx)]; }
  int cluster_count() const { return static_cast<int>(clusters.size()); }

  // largest power-of-two place that fits the cluster
  int max_place_width(int cluster_idx) const;
  // widest power of two <= core count; sizes the PTT columns
  int table_max_width() const;

  // fastest / slowest cluster; policies that need a big/LITTLE split use these
  int big_cluster() const;
  int little_cluster() const;
  std::vector<CoreId> cluster_cores(int cluster_idx) const;

  const KernelProfile& profile(TaskType t) const;
  double efficiency(TaskType t, int cluster_idx, int width) const;

  void validate() const;  // throws ConfigError
};

// two 4-core clusters, big ones 2.4x faster, calibrated to the bundled
// copy/sort/matmul kernel behaviors
MachineModel default_hikey_like();

// time = base / (speed * width * eff), inflated by max(1, demand/cap) for
// streaming kernels; `concurrent_bw_demand` includes this task's own demand
TimeUs simulate_task_time(TaskType type, const Place& place,
                          double concurrent_bw_demand, const MachineModel& model);

// the same law without contention; used to derive a task's bandwidth demand
TimeUs nominal_task_time(TaskType type, const Place& place, const MachineModel& model);

// optional working-set interference: max(1, ws_sum / cluster cache) when
// enabled and the kernel keeps a resident working set; `concurrent_ws_bytes`
// sums the working sets currently resident on that cluster
double cache_penalty_factor(TaskType type, double concurrent_ws_bytes,
                            int cluster_idx, const MachineModel& model);

MachineModel model_from_json(const std::string& text);
std::string model_to_json(const MachineModel& model);
MachineModel load_model(const std::string& path);

}  // namespace taosched
