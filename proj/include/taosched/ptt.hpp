/* ptt.hpp -- per-task-type performance trace table (EWMA times per core x width) */
#pragma once

#include <array>
#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "taosched/types.hpp"

namespace taosched {

// leader = floor(core / width) * width
CoreId leader_core(CoreId distributing_core, int width);

// supports widths up to 2^7; one row is exactly one cache line
inline constexpr int kPttMaxWidthColumns = 8;

// One table per TAO class. Rows are per-core and cache-line sized so each
// leader only touches its own line; cells hold EWMA execution times in
// microseconds with 0 meaning "never measured", which forces every
// configuration to be explored at least once.
class PttTable {
 public:
  // columns cover widths {1, 2, ..., max_width}
  PttTable(int n_cores, int max_width, double ewma_old_weight = 4.0);

  int cores() const { return n_cores_; }
  int columns() const { return n_columns_; }
  int max_width() const { return 1 << (n_columns_ - 1); }

  // width -> column index; throws ConfigError for unsupported widths
  int width_index(int width) const;

  // 0 = never measured; plain atomic load, safe against concurrent writers
  TimeUs read(CoreId core, int width) const;

  // First measurement replaces the sentinel; afterwards
  // cell' = (old_weight * old + new) / (old_weight + 1).
  // `leader` must be a valid leader for `width` (asserted in debug builds).
  void record(CoreId leader, int width, TimeUs measured);

  // valid leader with the minimal nonzero time at this width; ties go to the
  // lowest core id; nullopt while the whole column is unmeasured
  std::optional<CoreId> best_core_for_width(int width) const;

  // same scan restricted to cores [first, last]
  std::optional<CoreId> best_core_for_width_in(int width, CoreId first, CoreId last) const;

  // minimal nonzero time over leaders in [first, last]; 0 if none measured
  TimeUs min_time_in(int width, CoreId first, CoreId last) const;

 private:
  struct alignas(64) Row {
    std::array<std::atomic<double>, kPttMaxWidthColumns> cells;
  };
  static_assert(sizeof(Row) == 64, "one PTT row per cache line");

  int n_cores_;
  int n_columns_;
  double old_weight_;
  std::vector<Row> rows_;
};

// weight of a task class: LITTLE time / big time; nullopt while either side
// is still unmeasured
std::optional<double> weight_ratio(TimeUs big_time, TimeUs little_time);

struct PttDumpRow {
  TaskType type;
  CoreId core;
  int width;
  TimeUs ewma_us;
};

// Lazily instantiates one PttTable per task type at first sighting.
class PttStore {
 public:
  PttStore(int n_cores, int max_width, double ewma_old_weight = 4.0);

  PttTable& table(TaskType t);
  const PttTable* find(TaskType t) const;  // nullptr if the type was never seen

  int cores() const { return n_cores_; }
  int max_width() const { return max_width_; }

  std::vector<PttDumpRow> dump() const;          // nonzero cells only
  void preload(const std::vector<PttDumpRow>&);  // warm start

 private:
  int n_cores_;
  int max_width_;
  double old_weight_;
  mutable std::mutex create_mu_;
  std::array<std::atomic<PttTable*>, kNumTaskTypes> lookup_{};
  std::array<std::unique_ptr<PttTable>, kNumTaskTypes> owned_;
};

void dump_ptt_csv(std::ostream& os, const std::vector<PttDumpRow>& rows);
std::vector<PttDumpRow> load_ptt_csv(std::istream& is);

}  // namespace taosched
