/* metrics.hpp -- per-run results: core accounting, traces, placement audit log */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "taosched/types.hpp"

namespace taosched {

struct TraceEntry {
  int task = -1;
  TaskType type = TaskType::Synthetic;
  CoreId leader = 0;
  int width = 1;
  int criticality = 0;
  TimeUs start_us = 0;  // first core enters the task
  TimeUs end_us = 0;    // last core leaves it
};

// One row per placement decision, kept when a run is asked to audit its
// policy. `max_running_crit` is the tracker value the policy actually saw.
struct PlacementDecision {
  int task = -1;
  int criticality = 0;
  int max_running_crit = 0;
  bool critical = false;
  bool to_big = false;
  CoreId chosen_core = 0;
  int width = 1;
};

// Integer nanoseconds so busy + idle can be checked against
// cores * makespan without tolerance.
struct CoreStat {
  std::int64_t busy_ns = 0;
  std::int64_t idle_ns = 0;
};

struct RunMetrics {
  TimeUs makespan_us = 0;
  std::int64_t makespan_ns = 0;
  std::vector<CoreStat> core_stats;
  std::size_t tasks_executed = 0;
  std::size_t steals = 0;
  std::size_t tasks_widened = 0;   // molding grew the width past the hint
  std::size_t tasks_narrowed = 0;  // molding shrank it
  std::vector<TraceEntry> trace;
  std::vector<PlacementDecision> decisions;

  std::int64_t total_busy_ns() const;
  std::int64_t total_idle_ns() const;
};

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> load_trace_csv(std::istream& is);

// canonical byte string of a trace; equal strings mean identical schedules
std::string trace_fingerprint(const std::vector<TraceEntry>& trace);

}  // namespace taosched
