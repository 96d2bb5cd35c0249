/* policies.cpp -- placement policies, molding, and shared scheduler state */
#include "taosched/policies.hpp"

#include <algorithm>

namespace taosched {

std::string to_string(PolicySpec p) {
  switch (p) {
    case PolicySpec::Homogeneous: return "homogeneous";
    case PolicySpec::CritAware: return "crit-aware";
    case PolicySpec::CritPtt: return "crit-ptt";
    case PolicySpec::Weight: return "weight";
  }
  return "?";
}

PolicyConfig policy_config_from_name(const std::string& name) {
  PolicyConfig cfg;
  if (name == "homogeneous") {
    cfg.spec = PolicySpec::Homogeneous;
  } else if (name == "crit-aware") {
    cfg.spec = PolicySpec::CritAware;
  } else if (name == "crit-ptt") {
    cfg.spec = PolicySpec::CritPtt;
    cfg.molding = true;
  } else if (name == "weight") {
    cfg.spec = PolicySpec::Weight;
    cfg.molding = true;
  } else if (name == "mold") {
    cfg.spec = PolicySpec::Homogeneous;
    cfg.molding = true;
  } else {
    throw ConfigError("unknown policy '" + name +
                      "' (expected homogeneous, crit-aware, crit-ptt, weight, or mold)");
  }
  return cfg;
}

std::vector<std::string> canonical_policy_names() {
  return {"homogeneous", "crit-aware", "crit-ptt", "weight", "mold"};
}

SchedulerState::SchedulerState(const MachineModel& model, const PolicyConfig& cfg)
    : model_(model),
      ptt_(model.core_count(), model.table_max_width(), cfg.tun.ewma_old_weight),
      cluster_load_(model.clusters.size()),
      threshold_history_weight_(cfg.tun.threshold_history_weight) {
  threshold_.store(cfg.tun.init_weight_threshold, std::memory_order_relaxed);
}

void SchedulerState::task_scheduled(int criticality) {
  std::lock_guard<std::mutex> lk(crit_mu_);
  if (criticality >= static_cast<int>(crit_counts_.size()))
    crit_counts_.resize(static_cast<size_t>(criticality) + 1, 0);
  ++crit_counts_[static_cast<size_t>(criticality)];
  crit_max_ = std::max(crit_max_, criticality);
}

void SchedulerState::task_finished(int criticality) {
  std::lock_guard<std::mutex> lk(crit_mu_);
  --crit_counts_[static_cast<size_t>(criticality)];
  while (crit_max_ > 0 && crit_counts_[static_cast<size_t>(crit_max_)] == 0) --crit_max_;
}

int SchedulerState::max_running_criticality() const {
  std::lock_guard<std::mutex> lk(crit_mu_);
  return crit_max_;
}

void SchedulerState::add_load(int cluster_idx, int width) {
  total_load_.fetch_add(width, std::memory_order_relaxed);
  cluster_load_[static_cast<size_t>(cluster_idx)].fetch_add(width, std::memory_order_relaxed);
}

void SchedulerState::remove_load(int cluster_idx, int width) {
  total_load_.fetch_sub(width, std::memory_order_relaxed);
  cluster_load_[static_cast<size_t>(cluster_idx)].fetch_sub(width, std::memory_order_relaxed);
}

int SchedulerState::total_load() const { return total_load_.load(std::memory_order_relaxed); }

int SchedulerState::cluster_load(int cluster_idx) const {
  return cluster_load_[static_cast<size_t>(cluster_idx)].load(std::memory_order_relaxed);
}

double SchedulerState::weight_threshold() const {
  return threshold_.load(std::memory_order_relaxed);
}

void SchedulerState::observe_weight(double ratio) {
  double old = threshold_.load(std::memory_order_relaxed);
  double next;
  do {
    next = (ratio + threshold_history_weight_ * old) / (threshold_history_weight_ + 1.0);
  } while (!threshold_.compare_exchange_weak(old, next, std::memory_order_relaxed));
}

std::optional<double> measured_weight(const PttStore& ptt, TaskType t,
                                      const MachineModel& model, int prefer_width) {
  const PttTable* tbl = ptt.find(t);
  if (!tbl) return std::nullopt;
  const auto& big = model.cluster(model.big_cluster());
  const auto& little = model.cluster(model.little_cluster());
  auto ratio_at = [&](int w) -> std::optional<double> {
    if (w > std::min(floor_pow2(big.core_count), floor_pow2(little.core_count)))
      return std::nullopt;
    TimeUs bt = tbl->min_time_in(w, big.first_core, big.first_core + big.core_count - 1);
    TimeUs lt = tbl->min_time_in(w, little.first_core, little.first_core + little.core_count - 1);
    return weight_ratio(bt, lt);
  };
  if (auto r = ratio_at(prefer_width)) return r;
  for (int w = 1; w <= ptt.max_width(); w *= 2) {
    if (w == prefer_width) continue;
    if (auto r = ratio_at(w)) return r;
  }
  return std::nullopt;
}

namespace {

int capped_hint(const TaoNode& node, int max_width) {
  return std::min(node.resource_hint, max_width);
}

CoreId random_core_in(const MachineModel& model, int cluster_idx, Rng& rng) {
  const auto& c = model.cluster(cluster_idx);
  return c.first_core + rng.uniform_int(0, c.core_count - 1);
}

}  // namespace

PlacementResult choose_core(const TaoNode& node, const WakeupContext& ctx,
                            SchedulerState& state, const PolicyConfig& cfg, Rng& rng) {
  const MachineModel& model = state.model();
  const int n = model.core_count();
  PlacementResult out;

  switch (cfg.spec) {
    case PolicySpec::Homogeneous: {
      // keep the first successor where its parent ran, spread the rest
      out.target_core =
          ctx.successor_index == 0 ? ctx.completing_core : rng.uniform_int(0, n - 1);
      break;
    }
    case PolicySpec::CritAware: {
      out.max_running_crit = state.max_running_criticality();
      out.critical = node.criticality >= out.max_running_crit;
      int cl = out.critical ? model.big_cluster() : model.little_cluster();
      out.target_core = random_core_in(model, cl, rng);
      break;
    }
    case PolicySpec::CritPtt: {
      out.max_running_crit = state.max_running_criticality();
      out.critical = node.criticality >= out.max_running_crit;
      if (out.critical) {
        int w = capped_hint(node, model.table_max_width());
        const PttTable* tbl = state.ptt().find(node.type);
        auto best = tbl ? tbl->best_core_for_width(w) : std::nullopt;
        out.target_core = best ? *best : rng.uniform_int(0, n - 1);
      } else {
        out.target_core = rng.uniform_int(0, n - 1);
      }
      break;
    }
    case PolicySpec::Weight: {
      int w = capped_hint(node, model.table_max_width());
      auto ratio = measured_weight(state.ptt(), node.type, model, w);
      int cl;
      if (ratio) {
        out.to_big = *ratio >= state.weight_threshold();
        state.observe_weight(*ratio);
        cl = out.to_big ? model.big_cluster() : model.little_cluster();
      } else {
        cl = rng.uniform_int(0, model.cluster_count() - 1);
      }
      out.target_core = random_core_in(model, cl, rng);
      break;
    }
  }
  out.to_big = model.cluster_of(out.target_core) == model.big_cluster();
  return out;
}

int choose_width(const TaoNode& node, CoreId target_core, SchedulerState& state,
                 const PolicyConfig& cfg) {
  const MachineModel& model = state.model();
  const int ci = model.cluster_of(target_core);
  const int max_w = model.max_place_width(ci);
  const int cur = capped_hint(node, max_w);
  if (!cfg.molding) return cur;

  if (state.total_load() < model.core_count()) {
    // spare capacity: grow into the cluster's idle cores
    int slack = model.cluster(ci).core_count - state.cluster_load(ci);
    if (slack >= 1) return std::max(cur, floor_pow2(std::min(slack, max_w)));
    return cur;
  }

  // saturated: only change width when history says the total core-time
  // spent gets cheaper. Each candidate is judged by the row of the leader
  // the task would actually land on from this target core.
  const PttTable* tbl = state.ptt().find(node.type);
  if (!tbl) return cur;
  TimeUs t_cur = tbl->read(leader_core(target_core, cur), cur);
  if (t_cur <= 0) return cur;
  const double budget = cfg.mold_cost_symmetric ? t_cur * cur : t_cur;
  int best_w = cur;
  double best_cost = budget;
  for (int w = 1; w <= max_w; w *= 2) {
    if (w == cur) continue;
    TimeUs t = tbl->read(leader_core(target_core, w), w);
    if (t <= 0) continue;
    double cost = t * w;
    if (cost < best_cost) {
      best_cost = cost;
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace taosched
