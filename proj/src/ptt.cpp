/* ptt.cpp -- performance trace table implementation */
#include "taosched/ptt.hpp"

#include <cassert>
#include <istream>
#include <ostream>
#include <sstream>

namespace taosched {

CoreId leader_core(CoreId distributing_core, int width) {
  if (!is_pow2(width)) throw ConfigError("unsupported resource width " + std::to_string(width));
  if (distributing_core < 0) throw ConfigError("negative core id");
  return (distributing_core / width) * width;
}

PttTable::PttTable(int n_cores, int max_width, double ewma_old_weight)
    : n_cores_(n_cores), old_weight_(ewma_old_weight) {
  if (n_cores < 1) throw ConfigError("PTT needs at least one core");
  if (!is_pow2(max_width)) throw ConfigError("PTT max width must be a power of two");
  n_columns_ = log2_exact(max_width) + 1;
  if (n_columns_ > kPttMaxWidthColumns)
    throw ConfigError("PTT supports widths up to 2^" + std::to_string(kPttMaxWidthColumns - 1));
  rows_ = std::vector<Row>(static_cast<size_t>(n_cores));
  for (auto& r : rows_)
    for (auto& c : r.cells) c.store(0.0, std::memory_order_relaxed);
}

int PttTable::width_index(int width) const {
  if (!is_pow2(width) || width > max_width())
    throw ConfigError("unsupported resource width " + std::to_string(width));
  return log2_exact(width);
}

TimeUs PttTable::read(CoreId core, int width) const {
  return rows_[static_cast<size_t>(core)].cells[static_cast<size_t>(width_index(width))].load(
      std::memory_order_relaxed);
}

void PttTable::record(CoreId leader, int width, TimeUs measured) {
  const int col = width_index(width);
  assert(leader % width == 0 && "PTT writes come from the place leader");
  assert(measured > 0);
  auto& cell = rows_[static_cast<size_t>(leader)].cells[static_cast<size_t>(col)];
  double old = cell.load(std::memory_order_relaxed);
  for (;;) {
    const double next =
        old == 0.0 ? measured : (old_weight_ * old + measured) / (old_weight_ + 1.0);
    if (cell.compare_exchange_weak(old, next, std::memory_order_relaxed)) return;
  }
}

std::optional<CoreId> PttTable::best_core_for_width(int width) const {
  return best_core_for_width_in(width, 0, n_cores_ - 1);
}

std::optional<CoreId> PttTable::best_core_for_width_in(int width, CoreId first,
                                                       CoreId last) const {
  const int col = width_index(width);
  std::optional<CoreId> best;
  double best_time = 0;
  for (CoreId c = leader_core(first < 0 ? 0 : first, width); c <= last && c < n_cores_;
       c += width) {
    if (c < first) continue;
    double t = rows_[static_cast<size_t>(c)].cells[static_cast<size_t>(col)].load(
        std::memory_order_relaxed);
    if (t > 0 && (!best || t < best_time)) {
      best = c;
      best_time = t;
    }
  }
  return best;
}

TimeUs PttTable::min_time_in(int width, CoreId first, CoreId last) const {
  auto best = best_core_for_width_in(width, first, last);
  return best ? read(*best, width) : 0.0;
}

std::optional<double> weight_ratio(TimeUs big_time, TimeUs little_time) {
  if (big_time <= 0 || little_time <= 0) return std::nullopt;
  return little_time / big_time;
}

PttStore::PttStore(int n_cores, int max_width, double ewma_old_weight)
    : n_cores_(n_cores), max_width_(max_width), old_weight_(ewma_old_weight) {
  for (auto& p : lookup_) p.store(nullptr, std::memory_order_relaxed);
}

PttTable& PttStore::table(TaskType t) {
  auto& slot = lookup_[static_cast<size_t>(t)];
  PttTable* existing = slot.load(std::memory_order_acquire);
  if (existing) return *existing;
  std::lock_guard<std::mutex> lock(create_mu_);
  existing = slot.load(std::memory_order_relaxed);
  if (!existing) {
    owned_[static_cast<size_t>(t)] =
        std::make_unique<PttTable>(n_cores_, max_width_, old_weight_);
    existing = owned_[static_cast<size_t>(t)].get();
    slot.store(existing, std::memory_order_release);
  }
  return *existing;
}

const PttTable* PttStore::find(TaskType t) const {
  return lookup_[static_cast<size_t>(t)].load(std::memory_order_acquire);
}

std::vector<PttDumpRow> PttStore::dump() const {
  std::vector<PttDumpRow> rows;
  for (int t = 0; t < kNumTaskTypes; ++t) {
    const PttTable* tab = find(static_cast<TaskType>(t));
    if (!tab) continue;
    for (int w = 1; w <= tab->max_width(); w *= 2)
      for (CoreId c = 0; c < tab->cores(); c += w) {
        TimeUs us = tab->read(c, w);
        if (us > 0) rows.push_back({static_cast<TaskType>(t), c, w, us});
      }
  }
  return rows;
}

void PttStore::preload(const std::vector<PttDumpRow>& rows) {
  for (const auto& r : rows) {
    if (r.core != leader_core(r.core, r.width))
      throw ConfigError("PTT preload row names a non-leader core");
    if (r.ewma_us <= 0) throw ConfigError("PTT preload times must be positive");
    table(r.type).record(r.core, r.width, r.ewma_us);
  }
}

void dump_ptt_csv(std::ostream& os, const std::vector<PttDumpRow>& rows) {
  os << "# taosched-ptt v1\n";
  os << "type,core,width,ewma_us\n";
  for (const auto& r : rows)
    os << to_string(r.type) << ',' << r.core << ',' << r.width << ',' << r.ewma_us << '\n';
}

std::vector<PttDumpRow> load_ptt_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# taosched-ptt v1", 0) != 0)
    throw ConfigError("unrecognized PTT dump format");
  std::getline(is, line);  // header
  std::vector<PttDumpRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string type, core, width, us;
    std::getline(ss, type, ',');
    std::getline(ss, core, ',');
    std::getline(ss, width, ',');
    std::getline(ss, us, ',');
    rows.push_back({task_type_from_string(type), std::stoi(core), std::stoi(width),
                    std::stod(us)});
  }
  return rows;
}

}  // namespace taosched
