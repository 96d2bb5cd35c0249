/* dag.hpp -- moldable task DAG: nodes, criticality, parallelism metric, export */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taosched/types.hpp"

namespace taosched {

// Opaque work payload: meaning of `size` depends on the task type
// (matmul: matrix dimension, sort/copy: bytes, synthetic: width-1 microseconds).
struct WorkSpec {
  std::uint64_t size = 0;
  std::uint64_t seed = 0;
};

struct TaoNode {
  int id = -1;
  TaskType type = TaskType::Synthetic;
  WorkSpec work;
  int resource_hint = 1;  // power of two, never spans a cluster
  int criticality = 0;    // nodes on the longest path to any exit; 0 until assigned
  std::vector<int> successors;
  int pending_predecessors = 0;  // in-degree, fixed by finalize()
};

class TaoDag {
 public:
  int add_node(TaskType type, WorkSpec work = {}, int resource_hint = 1);
  void add_edge(int from, int to);

  // Computes in-degrees and roots and verifies acyclicity.
  void finalize();
  bool finalized() const { return finalized_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const TaoNode& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  TaoNode& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  const std::vector<TaoNode>& nodes() const { return nodes_; }
  const std::vector<int>& roots() const { return roots_; }

  // Throws StructuralError if a cycle is present.
  std::vector<int> topological_order() const;

  bool criticality_assigned() const { return crit_assigned_; }

  std::uint64_t generator_seed = 0;  // 0 when hand-built

 private:
  friend void assign_criticality(TaoDag&);
  std::vector<TaoNode> nodes_;
  std::vector<int> roots_;
  bool finalized_ = false;
  bool crit_assigned_ = false;
};

// criticality(node) = 1 + max over successors, leaves = 1; the head of the
// longest path ends up carrying the maximum value.
void assign_criticality(TaoDag& dag);

// max criticality over roots (requires assign_criticality)
int critical_path_length(const TaoDag& dag);

// node_count / critical_path_length; throws DomainError on an empty DAG
double degree_of_parallelism(const TaoDag& dag);

// GraphViz text, one fill color per task type
std::string export_dot(const TaoDag& dag);

// versioned JSON serialization for replay
std::string dag_to_json(const TaoDag& dag);
TaoDag dag_from_json(const std::string& text);
void save_dag(const TaoDag& dag, const std::string& path);
TaoDag load_dag(const std::string& path);

}  // namespace taosched
