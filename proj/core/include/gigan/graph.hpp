#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gigan {

using Edge = std::pair<int, int>;  // (parent, child), 0-based

/// Immutable directed acyclic graph. Construction validates endpoints,
/// rejects self-loops and duplicates, and throws CycleDetected when no
/// topological order exists.
class Dag {
 public:
  Dag() = default;
  Dag(int node_count, std::vector<Edge> edges, std::vector<std::string> node_names = {});

  [[nodiscard]] int node_count() const noexcept { return node_count_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
  [[nodiscard]] const std::vector<std::string>& node_names() const noexcept { return names_; }
  [[nodiscard]] const std::string& name(int node) const { return names_.at(node); }
  [[nodiscard]] int index_of(const std::string& name) const;

  /// Parents of a node in ascending index order.
  [[nodiscard]] const std::vector<int>& parents(int node) const { return parents_.at(node); }
  [[nodiscard]] const std::vector<int>& children(int node) const { return children_.at(node); }
  [[nodiscard]] bool has_edge(int parent, int child) const;
  [[nodiscard]] bool is_root(int node) const { return parents_.at(node).empty(); }

  /// Kahn order with ties broken by ascending node index.
  [[nodiscard]] const std::vector<int>& topological_order() const noexcept { return topo_; }
  /// Position of each node inside topological_order().
  [[nodiscard]] const std::vector<int>& topological_rank() const noexcept { return rank_; }

  /// All ancestors (excluding the node), ascending.
  [[nodiscard]] std::vector<int> ancestors(int node) const;

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> names_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::vector<int> topo_;
  std::vector<int> rank_;
};

/// Free-function form of Dag::topological_order.
std::vector<int> topological_order(const Dag& dag);

/// One discriminator domain per node plus the objective weights.
struct FamilySpec {
  std::vector<std::vector<int>> families;  // each sorted, duplicate-free
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return families.size(); }
  /// Throws InvalidGraph when a family is empty, unsorted or out of range,
  /// or when weights are negative or mis-sized.
  void validate(int node_count) const;
};

FamilySpec uniform_families(std::vector<std::vector<int>> families);

/// F_i = {i} ∪ Pa(i), w_i = 1/n.
FamilySpec child_parent_families(const Dag& dag);

/// F_i = {i} ∪ ancestors within graph distance `depth`, w_i = 1/n.
FamilySpec ancestor_families(const Dag& dag, int depth);

/// F_i = {i} ∪ S_i with |S_i| = |Pa(i)| drawn uniformly without replacement
/// from V \ ({i} ∪ Pa(i)). Throws InsufficientNodes when that set is too small.
FamilySpec misaligned_families(const Dag& dag, std::uint64_t seed);

/// The single family V with weight 1 (graph-agnostic discriminator).
FamilySpec monolithic_family(int node_count);

/// Hasse diagram of the subset lattice of {1..k}: nodes are subsets ordered
/// by (size, lexicographic), edges A -> B iff A ⊂ B and |B| = |A| + 1.
Dag hasse_dag(int k);

/// Members of each Hasse node, in node order.
std::vector<std::vector<int>> hasse_subsets(int k);

}  // namespace gigan
