/* metrics.cpp -- trace serialization and core accounting helpers */
#include "taosched/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace taosched {

std::int64_t RunMetrics::total_busy_ns() const {
  std::int64_t s = 0;
  for (const auto& c : core_stats) s += c.busy_ns;
  return s;
}

std::int64_t RunMetrics::total_idle_ns() const {
  std::int64_t s = 0;
  for (const auto& c : core_stats) s += c.idle_ns;
  return s;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
  os << "# taosched-trace v1\n";
  os << "task,type,leader,width,criticality,start_us,end_us\n";
  char buf[160];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%s,%d,%d,%d,%.9f,%.9f\n", e.task, to_string(e.type),
                  e.leader, e.width, e.criticality, e.start_us, e.end_us);
    os << buf;
  }
}

std::vector<TraceEntry> load_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# taosched-trace v1")
    throw ConfigError("not a trace file");
  std::getline(is, line);  // header
  std::vector<TraceEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TraceEntry e;
    std::getline(ss, field, ',');
    e.task = std::stoi(field);
    std::getline(ss, field, ',');
    e.type = task_type_from_string(field);
    std::getline(ss, field, ',');
    e.leader = std::stoi(field);
    std::getline(ss, field, ',');
    e.width = std::stoi(field);
    std::getline(ss, field, ',');
    e.criticality = std::stoi(field);
    std::getline(ss, field, ',');
    e.start_us = std::stod(field);
    std::getline(ss, field, ',');
    e.end_us = std::stod(field);
    out.push_back(e);
  }
  return out;
}

std::string trace_fingerprint(const std::vector<TraceEntry>& trace) {
  std::ostringstream ss;
  write_trace_csv(ss, trace);
  return ss.str();
}

}  // namespace taosched
