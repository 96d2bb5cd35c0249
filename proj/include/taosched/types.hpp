/* types.hpp -- core identifiers, error taxonomy, deterministic rng */
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace taosched {

using CoreId = int;
using TimeUs = double;  // microseconds; 0 is the "never measured" sentinel in the PTT

enum class TaskType : int { Copy = 0, Sort = 1, Matmul = 2, Synthetic = 3 };
inline constexpr int kNumTaskTypes = 4;

const char* to_string(TaskType t);
TaskType task_type_from_string(const std::string& s);

// Bad widths, unknown kernel types, malformed model/config files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Cycles and other broken-DAG conditions.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Operations applied outside their mathematical domain (e.g. DoP of an empty DAG).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr bool is_pow2(int x) { return x > 0 && (x & (x - 1)) == 0; }

// largest power of two <= x; 0 if x < 1
constexpr int floor_pow2(int x) {
  if (x < 1) return 0;
  int p = 1;
  while (p * 2 <= x) p *= 2;
  return p;
}

constexpr int log2_exact(int pow2) {
  int k = 0;
  while ((1 << k) < pow2) ++k;
  return k;
}

// A contiguous core partition: leader plus `width` cores within one cluster.
struct Place {
  CoreId leader = 0;
  int width = 1;
  CoreId end() const { return leader + width; }
  bool contains(CoreId c) const { return c >= leader && c < end(); }
};

// splitmix64: stable derivation of per-stream seeds from one run seed
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// mt19937_64 with hand-mapped draws so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // uniform in [lo, hi], inclusive
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }

  // uniform in [0, 1)
  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  template <typename Seq>
  auto pick(const Seq& xs) -> decltype(xs[0]) {
    return xs[uniform_int(0, static_cast<int>(xs.size()) - 1)];
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace taosched
