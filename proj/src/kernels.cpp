/* kernels.cpp -- chunk-pulling copy/sort/matmul/synthetic kernels */
#include "taosched/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace taosched {

namespace {

std::size_t scaled_elems(double bytes, double scale, std::size_t min_elems) {
  double elems = bytes / 8.0 * scale;
  if (elems < static_cast<double>(min_elems)) return min_elems;
  return static_cast<std::size_t>(elems);
}

}  // namespace

KernelTask::KernelTask(TaskType type, const WorkSpec& work, int width, double scale)
    : type_(type), width_(width) {
  if (width < 1) throw ConfigError("kernel width must be >= 1");
  Rng rng(work.seed);
  switch (type) {
    case TaskType::Copy: {
      std::size_t n = scaled_elems(static_cast<double>(work.size), scale, 1024);
      src_.resize(n);
      dst_.assign(n, 0.0);
      for (auto& x : src_) x = rng.uniform01();
      n_chunks_ = static_cast<int>(std::min<std::size_t>(32, (n + 8191) / 8192));
      break;
    }
    case TaskType::Sort: {
      std::size_t n = scaled_elems(static_cast<double>(work.size), scale, 256);
      keys_.resize(n);
      for (auto& k : keys_) k = rng.next();
      input_keys_ = keys_;
      n_chunks_ = 16;
      chunk_starts_.resize(static_cast<size_t>(n_chunks_) + 1);
      for (int i = 0; i <= n_chunks_; ++i)
        chunk_starts_[static_cast<size_t>(i)] =
            n * static_cast<std::size_t>(i) / static_cast<std::size_t>(n_chunks_);
      break;
    }
    case TaskType::Matmul: {
      dim_ = std::max(8, static_cast<int>(std::lround(work.size * std::cbrt(scale))));
      a_.resize(static_cast<size_t>(dim_) * dim_);
      b_.resize(static_cast<size_t>(dim_) * dim_);
      c_.assign(static_cast<size_t>(dim_) * dim_, 0.0);
      for (auto& x : a_) x = rng.uniform01() - 0.5;
      for (auto& x : b_) x = rng.uniform01() - 0.5;
      n_chunks_ = std::min(16, dim_);
      break;
    }
    case TaskType::Synthetic: {
      double iters = work.size * scale * 1000.0;  // ~1000 fma per microsecond
      synth_iters_ = iters < 1000.0 ? 1000 : static_cast<std::uint64_t>(iters);
      n_chunks_ = 8;
      synth_partials_.assign(static_cast<size_t>(n_chunks_), 0.0);
      break;
    }
  }
}

void KernelTask::copy_chunk(int idx) {
  std::size_t n = src_.size();
  std::size_t lo = n * static_cast<std::size_t>(idx) / static_cast<std::size_t>(n_chunks_);
  std::size_t hi = n * static_cast<std::size_t>(idx + 1) / static_cast<std::size_t>(n_chunks_);
  std::copy(src_.begin() + static_cast<std::ptrdiff_t>(lo),
            src_.begin() + static_cast<std::ptrdiff_t>(hi),
            dst_.begin() + static_cast<std::ptrdiff_t>(lo));
}

void KernelTask::sort_chunk(int idx) {
  auto lo = keys_.begin() + static_cast<std::ptrdiff_t>(chunk_starts_[static_cast<size_t>(idx)]);
  auto hi = keys_.begin() + static_cast<std::ptrdiff_t>(chunk_starts_[static_cast<size_t>(idx) + 1]);
  std::sort(lo, hi);
}

void KernelTask::merge_all() {
  // fold sorted chunks pairwise; boundaries shrink by half each pass
  std::vector<std::size_t> bounds = chunk_starts_;
  while (bounds.size() > 2) {
    std::vector<std::size_t> next;
    next.push_back(bounds.front());
    for (std::size_t i = 0; i + 2 < bounds.size(); i += 2) {
      std::inplace_merge(keys_.begin() + static_cast<std::ptrdiff_t>(bounds[i]),
                         keys_.begin() + static_cast<std::ptrdiff_t>(bounds[i + 1]),
                         keys_.begin() + static_cast<std::ptrdiff_t>(bounds[i + 2]));
      next.push_back(bounds[i + 2]);
    }
    if (bounds.size() % 2 == 0) next.push_back(bounds.back());
    bounds = std::move(next);
  }
}

void KernelTask::matmul_chunk(int idx) {
  // same accumulation order as naive_matmul so results agree bitwise
  int lo = dim_ * idx / n_chunks_;
  int hi = dim_ * (idx + 1) / n_chunks_;
  for (int i = lo; i < hi; ++i)
    for (int j = 0; j < dim_; ++j) {
      double s = 0;
      for (int k = 0; k < dim_; ++k)
        s += a_[static_cast<size_t>(i) * dim_ + k] * b_[static_cast<size_t>(k) * dim_ + j];
      c_[static_cast<size_t>(i) * dim_ + j] = s;
    }
}

void KernelTask::synth_chunk(int idx) {
  std::uint64_t iters = synth_iters_ / static_cast<std::uint64_t>(n_chunks_);
  double acc = 1.0 + idx;
  for (std::uint64_t i = 0; i < iters; ++i) acc = acc * 1.0000000001 + 1e-9;
  synth_partials_[static_cast<size_t>(idx)] = acc;
}

void KernelTask::run_share(int member) {
  if (member < 0 || member >= width_) throw ConfigError("bad kernel member index");
  shares_run_.fetch_add(1, std::memory_order_relaxed);
  int idx;
  while ((idx = next_chunk_.fetch_add(1, std::memory_order_relaxed)) < n_chunks_) {
    switch (type_) {
      case TaskType::Copy: copy_chunk(idx); break;
      case TaskType::Sort: sort_chunk(idx); break;
      case TaskType::Matmul: matmul_chunk(idx); break;
      case TaskType::Synthetic: synth_chunk(idx); break;
    }
  }
  // the last member out runs the serial tail; nobody waits on anybody
  if (members_done_.fetch_add(1, std::memory_order_acq_rel) + 1 == width_)
    if (type_ == TaskType::Sort) merge_all();
}

KernelResult KernelTask::validate() const {
  KernelResult r;
  if (shares_run_.load() != width_) {
    r.what = "expected " + std::to_string(width_) + " shares, saw " +
             std::to_string(shares_run_.load());
    return r;
  }
  switch (type_) {
    case TaskType::Copy: {
      if (dst_ != src_) {
        r.what = "copy output differs from source";
        return r;
      }
      break;
    }
    case TaskType::Sort: {
      if (!std::is_sorted(keys_.begin(), keys_.end())) {
        r.what = "sort output not ordered";
        return r;
      }
      std::vector<std::uint64_t> ref = input_keys_;
      std::sort(ref.begin(), ref.end());
      if (ref != keys_) {
        r.what = "sort output not a permutation of the input";
        return r;
      }
      break;
    }
    case TaskType::Matmul: {
      std::vector<double> ref = naive_matmul(a_, b_, dim_);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        double tol = 1e-9 * std::max(1.0, std::abs(ref[i]));
        if (std::abs(ref[i] - c_[i]) > tol) {
          r.what = "matmul element " + std::to_string(i) + " off by more than 1e-9";
          return r;
        }
      }
      break;
    }
    case TaskType::Synthetic: {
      for (double p : synth_partials_)
        if (!std::isfinite(p)) {
          r.what = "synthetic accumulator diverged";
          return r;
        }
      break;
    }
  }
  r.valid = true;
  return r;
}

std::vector<double> naive_matmul(const std::vector<double>& a,
                                 const std::vector<double>& b, int n) {
  std::vector<double> c(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int k = 0; k < n; ++k)
        s += a[static_cast<size_t>(i) * n + k] * b[static_cast<size_t>(k) * n + j];
      c[static_cast<size_t>(i) * n + j] = s;
    }
  return c;
}

}  // namespace taosched
