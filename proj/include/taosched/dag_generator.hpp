/* dag_generator.hpp -- randomized layered benchmark DAGs */
#pragma once

#include <cstdint>

#include "taosched/dag.hpp"

namespace taosched {

// Fractions of each kernel type over the node set; must sum to 1.
struct TypeMix {
  double copy = 1.0 / 3;
  double sort = 1.0 / 3;
  double matmul = 1.0 / 3;
  double synthetic = 0.0;
};

// Layered-generator knobs. Layer widths are drawn around mean_layer_width,
// every node keeps one predecessor in the previous layer, so the critical
// path equals the layer count and the achieved degree of parallelism lands
// near mean_layer_width. The achieved value is seed-dependent; measure it
// with degree_of_parallelism() after generation.
struct DagShape {
  double mean_layer_width = 2.0;
  int max_layer_width = 0;      // 0 = uncapped
  double extra_edge_prob = 0.2; // chance of each optional cross-layer edge
  int max_extra_preds = 2;
};

// Default paper-style work payloads per kernel type.
WorkSpec default_work(TaskType type, std::uint64_t seed);

// Deterministic in (arguments, seed). Criticality is assigned before return.
TaoDag generate_random_dag(int n_nodes, const TypeMix& mix, const DagShape& shape,
                           std::uint64_t seed);

}  // namespace taosched
