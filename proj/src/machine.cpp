/* machine.cpp -- machine model validation, calibration defaults, JSON io */
#include "taosched/machine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace taosched {

int MachineModel::core_count() const {
  int n = 0;
  for (const auto& c : clusters) n += c.core_count;
  return n;
}

int MachineModel::cluster_of(CoreId core) const {
  for (size_t i = 0; i < clusters.size(); ++i)
    if (core >= clusters[i].first_core &&
        core < clusters[i].first_core + clusters[i].core_count)
      return static_cast<int>(i);
  throw ConfigError("core " + std::to_string(core) + " outside every cluster");
}

int MachineModel::max_place_width(int cluster_idx) const {
  return floor_pow2(cluster(cluster_idx).core_count);
}

int MachineModel::table_max_width() const { return floor_pow2(core_count()); }

int MachineModel::big_cluster() const {
  if (clusters.empty()) throw ConfigError("model has no clusters");
  int best = 0;
  for (int i = 1; i < cluster_count(); ++i)
    if (cluster(i).speed > cluster(best).speed) best = i;
  return best;
}

int MachineModel::little_cluster() const {
  if (clusters.size() < 2)
    throw ConfigError("big/LITTLE policies need at least two clusters");
  int best = 0;
  for (int i = 1; i < cluster_count(); ++i)
    if (cluster(i).speed < cluster(best).speed) best = i;
  return best;
}

std::vector<CoreId> MachineModel::cluster_cores(int cluster_idx) const {
  const auto& c = cluster(cluster_idx);
  std::vector<CoreId> out;
  for (int i = 0; i < c.core_count; ++i) out.push_back(c.first_core + i);
  return out;
}

const KernelProfile& MachineModel::profile(TaskType t) const {
  const auto& p = profiles[static_cast<size_t>(t)];
  if (!p) throw ConfigError(std::string("no kernel profile for type ") + to_string(t));
  return *p;
}

double MachineModel::efficiency(TaskType t, int cluster_idx, int width) const {
  const auto& p = profile(t);
  if (cluster_idx < 0 || cluster_idx >= static_cast<int>(p.efficiency.size()))
    throw ConfigError("kernel profile missing a cluster efficiency curve");
  const auto& curve = p.efficiency[static_cast<size_t>(cluster_idx)];
  int idx = log2_exact(width);
  if (!is_pow2(width) || idx >= static_cast<int>(curve.size()))
    throw ConfigError("no efficiency entry for width " + std::to_string(width));
  return curve[static_cast<size_t>(idx)];
}

void MachineModel::validate() const {
  if (clusters.empty()) throw ConfigError("model has no clusters");
  int expect = 0;
  for (const auto& c : clusters) {
    if (c.first_core != expect)
      throw ConfigError("cluster core ids must be dense and ascending");
    if (c.core_count < 1) throw ConfigError("empty cluster");
    if (c.speed <= 0) throw ConfigError("cluster speed must be positive");
    if (c.cache_bytes < 0) throw ConfigError("cluster cache size must be non-negative");
    // leader arithmetic relies on aligned power-of-two clusters
    if (!is_pow2(c.core_count))
      throw ConfigError("cluster core counts must be powers of two");
    if (c.first_core % c.core_count != 0)
      throw ConfigError("cluster base core must be aligned to its size");
    expect += c.core_count;
  }
  for (int t = 0; t < kNumTaskTypes; ++t) {
    const auto& p = profiles[static_cast<size_t>(t)];
    if (!p) continue;
    if (p->base_time_us <= 0) throw ConfigError("profile base time must be positive");
    if (p->efficiency.size() != clusters.size())
      throw ConfigError("profile needs one efficiency curve per cluster");
    for (size_t ci = 0; ci < p->efficiency.size(); ++ci) {
      const auto& curve = p->efficiency[ci];
      int need = log2_exact(max_place_width(static_cast<int>(ci))) + 1;
      if (static_cast<int>(curve.size()) < need)
        throw ConfigError("efficiency curve shorter than the cluster's widths");
      for (double e : curve)
        if (e <= 0 || e > 1.0) throw ConfigError("efficiency values must be in (0, 1]");
    }
  }
  if (memory_bandwidth_cap < 0)
    throw ConfigError("bandwidth cap must be non-negative");
}

MachineModel default_hikey_like() {
  MachineModel m;
  m.name = "hikey960-like";
  // cache sizes leave headroom below the hardware L2s: one resident sort
  // exactly fits the LITTLE cluster and a second one thrashes it, while the
  // big cluster absorbs three before degrading
  m.clusters = {{"LITTLE", 0, 4, 1.0, 512.0 * 1024},
                {"big", 4, 4, 2.4, 1536.0 * 1024}};
  m.memory_bandwidth_cap = 30.24e9;
  m.cache_penalty_enabled = false;

  // compute-bound: scales linearly with width on both clusters; the per-core
  // blocks live in L1, so it neither feels nor adds shared-cache pressure
  KernelProfile matmul;
  matmul.base_time_us = 4000;
  matmul.efficiency = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  matmul.working_set_bytes = 0;
  m.profiles[static_cast<size_t>(TaskType::Matmul)] = matmul;

  // cache-resident with an internal merge reduction: wider places help less,
  // and big cores only buy ~1.1x
  KernelProfile sort;
  sort.base_time_us = 4000;
  sort.efficiency = {{1.0, 0.85, 0.62},
                     {1.1 / 2.4, 1.1 / 2.4 * 0.85, 1.1 / 2.4 * 0.62}};
  sort.working_set_bytes = 524288;
  m.profiles[static_cast<size_t>(TaskType::Sort)] = sort;

  // streaming: a big place issues requests right at the shared cap at every
  // width (nominal 1111us flat, demand 30.24 GB/s), so wider big places gain
  // nothing; LITTLE places top out near 17 GB/s and stay request-rate-bound
  KernelProfile copy;
  copy.base_time_us = 2000;
  copy.efficiency = {{1.0, 0.51, 0.26}, {0.75, 0.375, 0.1875}};
  copy.bytes_streamed = 33.6e6;
  m.profiles[static_cast<size_t>(TaskType::Copy)] = copy;

  KernelProfile synth;
  synth.base_time_us = 1000;
  synth.efficiency = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  m.profiles[static_cast<size_t>(TaskType::Synthetic)] = synth;

  m.validate();
  return m;
}

TimeUs nominal_task_time(TaskType type, const Place& place, const MachineModel& model) {
  const int ci = model.cluster_of(place.leader);
  if (place.end() > model.cluster(ci).first_core + model.cluster(ci).core_count)
    throw ConfigError("place spans clusters");
  const auto& prof = model.profile(type);
  const double eff = model.efficiency(type, ci, place.width);
  return prof.base_time_us / (model.cluster(ci).speed * place.width * eff);
}

TimeUs simulate_task_time(TaskType type, const Place& place,
                          double concurrent_bw_demand, const MachineModel& model) {
  TimeUs t = nominal_task_time(type, place, model);
  const auto& prof = model.profile(type);
  if (prof.bytes_streamed > 0 && model.memory_bandwidth_cap > 0)
    t *= std::max(1.0, concurrent_bw_demand / model.memory_bandwidth_cap);
  return t;
}

double cache_penalty_factor(TaskType type, double concurrent_ws_bytes,
                            int cluster_idx, const MachineModel& model) {
  if (!model.cache_penalty_enabled) return 1.0;
  const double cap = model.cluster(cluster_idx).cache_bytes;
  if (cap <= 0) return 1.0;
  const auto& prof = model.profile(type);
  if (prof.working_set_bytes <= 0 || prof.bytes_streamed > 0) return 1.0;
  return std::max(1.0, concurrent_ws_bytes / cap);
}

namespace {
const char* kFormat = "taosched-machine";
}

std::string model_to_json(const MachineModel& model) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = 1;
  j["name"] = model.name;
  j["memory_bandwidth_bytes_per_s"] = model.memory_bandwidth_cap;
  j["cache_penalty_enabled"] = model.cache_penalty_enabled;
  for (const auto& c : model.clusters)
    j["clusters"].push_back({{"name", c.name},
                             {"first_core", c.first_core},
                             {"core_count", c.core_count},
                             {"speed", c.speed},
                             {"cache_bytes", c.cache_bytes}});
  auto& profs = j["profiles"] = nlohmann::json::object();
  for (int t = 0; t < kNumTaskTypes; ++t) {
    const auto& p = model.profiles[static_cast<size_t>(t)];
    if (!p) continue;
    nlohmann::json jp;
    jp["base_time_us"] = p->base_time_us;
    jp["bytes_streamed"] = p->bytes_streamed;
    jp["working_set_bytes"] = p->working_set_bytes;
    for (size_t ci = 0; ci < p->efficiency.size(); ++ci)
      jp["efficiency"][model.clusters[ci].name] = p->efficiency[ci];
    profs[to_string(static_cast<TaskType>(t))] = jp;
  }
  return j.dump(2);
}

MachineModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad machine model file: ") + e.what());
  }
  if (j.value("format", "") != kFormat || j.value("version", 0) != 1)
    throw ConfigError("unrecognized machine model format/version");
  MachineModel m;
  m.name = j.value("name", "machine");
  m.memory_bandwidth_cap = j.value("memory_bandwidth_bytes_per_s", 0.0);
  m.cache_penalty_enabled = j.value("cache_penalty_enabled", false);
  for (const auto& jc : j.at("clusters"))
    m.clusters.push_back({jc.at("name").get<std::string>(),
                          jc.at("first_core").get<int>(),
                          jc.at("core_count").get<int>(),
                          jc.at("speed").get<double>(),
                          jc.value("cache_bytes", 0.0)});
  if (j.contains("profiles"))
    for (auto it = j["profiles"].begin(); it != j["profiles"].end(); ++it) {
      TaskType t = task_type_from_string(it.key());
      KernelProfile p;
      p.base_time_us = it.value().at("base_time_us").get<double>();
      p.bytes_streamed = it.value().value("bytes_streamed", 0.0);
      p.working_set_bytes = it.value().value("working_set_bytes", 0.0);
      p.efficiency.resize(m.clusters.size());
      for (size_t ci = 0; ci < m.clusters.size(); ++ci)
        p.efficiency[ci] =
            it.value().at("efficiency").at(m.clusters[ci].name).get<std::vector<double>>();
      m.profiles[static_cast<size_t>(t)] = p;
    }
  m.validate();
  return m;
}

MachineModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace taosched
