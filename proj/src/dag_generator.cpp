/* dag_generator.cpp -- layered random DAG generation with type shuffling */
#include "taosched/dag_generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace taosched {

WorkSpec default_work(TaskType type, std::uint64_t seed) {
  WorkSpec w;
  w.seed = seed;
  switch (type) {
    case TaskType::Matmul: w.size = 64; break;           // 64x64 doubles
    case TaskType::Sort: w.size = 262144; break;         // 256 KiB input array
    case TaskType::Copy: w.size = 16777216; break;       // 16 MiB, 2x traffic
    case TaskType::Synthetic: w.size = 1000; break;      // ~1 ms of width-1 work
  }
  return w;
}

namespace {

std::vector<TaskType> shuffled_types(int n, const TypeMix& mix, Rng& rng) {
  const double sum = mix.copy + mix.sort + mix.matmul + mix.synthetic;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("type mix proportions must sum to 1");
  const double props[kNumTaskTypes] = {mix.copy, mix.sort, mix.matmul, mix.synthetic};
  for (double p : props)
    if (p < 0) throw ConfigError("type mix proportions must be non-negative");

  // largest-remainder rounding so counts match the proportions
  int counts[kNumTaskTypes];
  double rema[kNumTaskTypes];
  int assigned = 0;
  for (int t = 0; t < kNumTaskTypes; ++t) {
    double exact = props[t] * n;
    counts[t] = static_cast<int>(exact);
    rema[t] = exact - counts[t];
    assigned += counts[t];
  }
  while (assigned < n) {
    int best = 0;
    for (int t = 1; t < kNumTaskTypes; ++t)
      if (rema[t] > rema[best]) best = t;
    counts[best]++;
    rema[best] = -1;
    assigned++;
  }

  std::vector<TaskType> types;
  types.reserve(static_cast<size_t>(n));
  for (int t = 0; t < kNumTaskTypes; ++t)
    types.insert(types.end(), static_cast<size_t>(counts[t]), static_cast<TaskType>(t));
  // Fisher-Yates with our deterministic rng
  for (int i = n - 1; i > 0; --i)
    std::swap(types[static_cast<size_t>(i)],
              types[static_cast<size_t>(rng.uniform_int(0, i))]);
  return types;
}

}  // namespace

TaoDag generate_random_dag(int n_nodes, const TypeMix& mix, const DagShape& shape,
                           std::uint64_t seed) {
  if (n_nodes < 1) throw ConfigError("n_nodes must be >= 1");
  if (shape.mean_layer_width < 1.0)
    throw ConfigError("mean_layer_width must be >= 1");
  if (shape.max_layer_width < 0 || shape.max_extra_preds < 0 ||
      shape.extra_edge_prob < 0 || shape.extra_edge_prob > 1)
    throw ConfigError("infeasible DAG shape parameters");

  Rng rng(mix_seed(seed, 0x9a6));
  auto types = shuffled_types(n_nodes, mix, rng);

  // draw layer widths around the mean until all nodes are placed
  const int cap = shape.max_layer_width > 0 ? shape.max_layer_width : n_nodes;
  std::vector<int> layer_width;
  int placed = 0;
  while (placed < n_nodes) {
    double u = 0.5 + rng.uniform01() * (2.0 * shape.mean_layer_width - 1.0);
    int w = std::clamp(static_cast<int>(std::lround(u)), 1, cap);
    w = std::min(w, n_nodes - placed);
    layer_width.push_back(w);
    placed += w;
  }

  TaoDag dag;
  dag.generator_seed = seed;
  std::vector<std::vector<int>> layers(layer_width.size());
  int next = 0;
  for (size_t l = 0; l < layer_width.size(); ++l)
    for (int i = 0; i < layer_width[l]; ++i) {
      TaskType t = types[static_cast<size_t>(next)];
      int id = dag.add_node(t, default_work(t, mix_seed(seed, 0xd0d + next)));
      layers[l].push_back(id);
      ++next;
    }

  // one predecessor in the previous layer keeps every layer on a longest path
  for (size_t l = 1; l < layers.size(); ++l)
    for (int id : layers[l])
      dag.add_edge(rng.pick(layers[l - 1]), id);

  // sparse extra edges from any earlier layer
  for (size_t l = 1; l < layers.size(); ++l)
    for (int id : layers[l])
      for (int k = 0; k < shape.max_extra_preds; ++k)
        if (rng.uniform01() < shape.extra_edge_prob) {
          size_t src_layer = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(l) - 1));
          dag.add_edge(rng.pick(layers[src_layer]), id);
        }

  dag.finalize();
  assign_criticality(dag);
  return dag;
}

}  // namespace taosched
