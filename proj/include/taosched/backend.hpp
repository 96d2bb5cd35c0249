/* backend.hpp -- common entry points for the simulated and native executors */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taosched/dag.hpp"
#include "taosched/machine.hpp"
#include "taosched/metrics.hpp"
#include "taosched/policies.hpp"
#include "taosched/ptt.hpp"

namespace taosched {

enum class Backend { Sim, Native };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct RunOptions {
  PolicyConfig policy;
  std::uint64_t seed = 1;
  bool record_trace = false;
  bool record_decisions = false;
  // warm-start tables; copied into the run's own store
  const std::vector<PttDumpRow>* ptt_preload = nullptr;
  // when set, receives the run's final tables
  std::vector<PttDumpRow>* ptt_dump_out = nullptr;
  // native only: scales every kernel's work so functional tests stay fast
  double native_work_scale = 1.0;
};

// Deterministic discrete-event execution on the machine model. Same dag,
// model, options and seed always produce byte-identical traces.
RunMetrics run_simulated(const TaoDag& dag, const MachineModel& model,
                         const RunOptions& opt);

// Real threads and real kernels, one worker per model core, heterogeneity
// emulated by time padding. Timings are wall clock and therefore noisy.
RunMetrics run_native(const TaoDag& dag, const MachineModel& model, const RunOptions& opt);

RunMetrics run_backend(Backend b, const TaoDag& dag, const MachineModel& model,
                       const RunOptions& opt);

}  // namespace taosched
