/* dag.cpp -- DAG construction, criticality assignment, DOT/JSON export */
#include "taosched/dag.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace taosched {

const char* to_string(TaskType t) {
  switch (t) {
    case TaskType::Copy: return "copy";
    case TaskType::Sort: return "sort";
    case TaskType::Matmul: return "matmul";
    case TaskType::Synthetic: return "synthetic";
  }
  return "?";
}

TaskType task_type_from_string(const std::string& s) {
  if (s == "copy") return TaskType::Copy;
  if (s == "sort") return TaskType::Sort;
  if (s == "matmul") return TaskType::Matmul;
  if (s == "synthetic") return TaskType::Synthetic;
  throw ConfigError("unknown task type: " + s);
}

int TaoDag::add_node(TaskType type, WorkSpec work, int resource_hint) {
  if (!is_pow2(resource_hint))
    throw ConfigError("resource hint must be a power of two, got " +
                      std::to_string(resource_hint));
  if (finalized_) throw StructuralError("cannot add nodes to a finalized DAG");
  TaoNode n;
  n.id = node_count();
  n.type = type;
  n.work = work;
  n.resource_hint = resource_hint;
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

void TaoDag::add_edge(int from, int to) {
  if (finalized_) throw StructuralError("cannot add edges to a finalized DAG");
  if (from < 0 || from >= node_count() || to < 0 || to >= node_count())
    throw StructuralError("edge endpoint out of range");
  if (from == to) throw StructuralError("self edge");
  auto& succ = nodes_[static_cast<size_t>(from)].successors;
  if (std::find(succ.begin(), succ.end(), to) == succ.end()) succ.push_back(to);
}

void TaoDag::finalize() {
  for (auto& n : nodes_) n.pending_predecessors = 0;
  for (const auto& n : nodes_)
    for (int s : n.successors) nodes_[static_cast<size_t>(s)].pending_predecessors++;
  roots_.clear();
  for (const auto& n : nodes_)
    if (n.pending_predecessors == 0) roots_.push_back(n.id);
  finalized_ = true;
  topological_order();  // acyclicity check
}

std::vector<int> TaoDag::topological_order() const {
  std::vector<int> indeg(nodes_.size(), 0);
  for (const auto& n : nodes_)
    for (int s : n.successors) indeg[static_cast<size_t>(s)]++;
  std::vector<int> order;
  order.reserve(nodes_.size());
  std::vector<int> frontier;
  for (const auto& n : nodes_)
    if (indeg[static_cast<size_t>(n.id)] == 0) frontier.push_back(n.id);
  while (!frontier.empty()) {
    int id = frontier.back();
    frontier.pop_back();
    order.push_back(id);
    for (int s : nodes_[static_cast<size_t>(id)].successors)
      if (--indeg[static_cast<size_t>(s)] == 0) frontier.push_back(s);
  }
  if (order.size() != nodes_.size())
    throw StructuralError("cycle detected in task DAG");
  return order;
}

void assign_criticality(TaoDag& dag) {
  auto order = dag.topological_order();
  // walk in reverse topological order so successors resolve first
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TaoNode& n = dag.node(*it);
    int best = 0;
    for (int s : n.successors) best = std::max(best, dag.node(s).criticality);
    n.criticality = 1 + best;
  }
  dag.crit_assigned_ = true;
}

int critical_path_length(const TaoDag& dag) {
  if (!dag.criticality_assigned())
    throw DomainError("criticality not assigned");
  int cp = 0;
  for (int r : dag.roots()) cp = std::max(cp, dag.node(r).criticality);
  return cp;
}

double degree_of_parallelism(const TaoDag& dag) {
  if (dag.node_count() == 0)
    throw DomainError("degree of parallelism of an empty DAG");
  return static_cast<double>(dag.node_count()) / critical_path_length(dag);
}

namespace {
const char* fill_color(TaskType t) {
  switch (t) {
    case TaskType::Matmul: return "red";
    case TaskType::Sort: return "lightblue";
    case TaskType::Copy: return "green";
    case TaskType::Synthetic: return "gray";
  }
  return "white";
}
}  // namespace

std::string export_dot(const TaoDag& dag) {
  std::ostringstream os;
  os << "digraph taodag {\n";
  for (const auto& n : dag.nodes())
    os << "  n" << n.id << " [label=\"" << n.id << "\", style=filled, fillcolor="
       << fill_color(n.type) << "];\n";
  for (const auto& n : dag.nodes())
    for (int s : n.successors) os << "  n" << n.id << " -> n" << s << ";\n";
  os << "}\n";
  return os.str();
}

std::string dag_to_json(const TaoDag& dag) {
  nlohmann::json j;
  j["format"] = "taosched-dag";
  j["version"] = 1;
  j["seed"] = dag.generator_seed;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& n : dag.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"type", to_string(n.type)},
                     {"hint", n.resource_hint},
                     {"size", n.work.size},
                     {"wseed", n.work.seed}});
    for (int s : n.successors) edges.push_back({n.id, s});
  }
  return j.dump(2);
}

TaoDag dag_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad DAG file: ") + e.what());
  }
  if (j.value("format", "") != "taosched-dag" || j.value("version", 0) != 1)
    throw ConfigError("unrecognized DAG file format/version");
  TaoDag dag;
  dag.generator_seed = j.value("seed", 0ull);
  for (const auto& jn : j.at("nodes")) {
    WorkSpec w;
    w.size = jn.value("size", 0ull);
    w.seed = jn.value("wseed", 0ull);
    int id = dag.add_node(task_type_from_string(jn.at("type").get<std::string>()),
                          w, jn.value("hint", 1));
    if (id != jn.at("id").get<int>())
      throw ConfigError("DAG file node ids must be dense and in order");
  }
  for (const auto& je : j.at("edges"))
    dag.add_edge(je.at(0).get<int>(), je.at(1).get<int>());
  dag.finalize();
  return dag;
}

void save_dag(const TaoDag& dag, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << dag_to_json(dag);
}

TaoDag load_dag(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return dag_from_json(ss.str());
}

}  // namespace taosched
