/* kernels.hpp -- real moldable kernels for the native executor */
#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "taosched/dag.hpp"
#include "taosched/types.hpp"

namespace taosched {

struct KernelResult {
  bool valid = false;
  std::string what;  // failure description, empty when valid
};

// One task's worth of real work, shared by the cores of its place. Members
// pull chunks from an atomic counter, so shares never block each other and
// may even run sequentially; the whole task is done when every member's
// run_share has returned.
//
// WorkSpec.size units: matmul = matrix dimension, sort/copy = input bytes,
// synthetic = microseconds of width-1 work. `scale` shrinks or grows the
// work without touching the spec.
class KernelTask {
 public:
  KernelTask(TaskType type, const WorkSpec& work, int width, double scale = 1.0);

  KernelTask(const KernelTask&) = delete;
  KernelTask& operator=(const KernelTask&) = delete;

  TaskType type() const { return type_; }
  int width() const { return width_; }

  // call exactly once per member index in [0, width)
  void run_share(int member);

  // full self-check: copy compares against the source, sort checks order and
  // permutation, matmul recomputes with the reference loop
  KernelResult validate() const;

  // exposed so tests can run independent oracles over the actual buffers
  int matrix_dim() const { return dim_; }
  const std::vector<double>& matrix_a() const { return a_; }
  const std::vector<double>& matrix_b() const { return b_; }
  const std::vector<double>& matrix_c() const { return c_; }
  const std::vector<std::uint64_t>& keys() const { return keys_; }
  const std::vector<std::uint64_t>& input_keys() const { return input_keys_; }
  const std::vector<double>& copy_src() const { return src_; }
  const std::vector<double>& copy_dst() const { return dst_; }

 private:
  void copy_chunk(int idx);
  void sort_chunk(int idx);
  void merge_all();
  void matmul_chunk(int idx);
  void synth_chunk(int idx);

  TaskType type_;
  int width_;
  int n_chunks_ = 0;

  std::vector<double> a_, b_, c_;            // matmul
  int dim_ = 0;
  std::vector<std::uint64_t> keys_, input_keys_;  // sort
  std::vector<std::size_t> chunk_starts_;
  std::vector<double> src_, dst_;            // copy
  std::uint64_t synth_iters_ = 0;            // synthetic
  std::vector<double> synth_partials_;

  std::atomic<int> next_chunk_{0};
  std::atomic<int> members_done_{0};
  std::atomic<int> shares_run_{0};
};

// reference implementation used as the oracle for the parallel kernel
std::vector<double> naive_matmul(const std::vector<double>& a,
                                 const std::vector<double>& b, int n);

}  // namespace taosched
