#include "gigan/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

#include "gigan/errors.hpp"
#include "gigan/rng.hpp"

namespace gigan {

Dag::Dag(int node_count, std::vector<Edge> edges, std::vector<std::string> node_names)
    : node_count_(node_count), edges_(std::move(edges)), names_(std::move(node_names)) {
  if (node_count_ <= 0) throw InvalidGraph("Dag: node_count must be positive");
  if (names_.empty()) {
    names_.reserve(node_count_);
    for (int i = 0; i < node_count_; ++i) names_.push_back("X" + std::to_string(i));
  } else if (static_cast<int>(names_.size()) != node_count_) {
    throw InvalidGraph("Dag: node_names size does not match node_count");
  }
  std::set<std::string> unique_names(names_.begin(), names_.end());
  if (static_cast<int>(unique_names.size()) != node_count_) {
    throw InvalidGraph("Dag: node names must be unique");
  }

  parents_.assign(node_count_, {});
  children_.assign(node_count_, {});
  std::set<Edge> seen;
  for (auto [p, c] : edges_) {
    if (p < 0 || p >= node_count_ || c < 0 || c >= node_count_) {
      throw InvalidGraph("Dag: edge endpoint out of range");
    }
    if (p == c) throw InvalidGraph("Dag: self-loop on node " + std::to_string(p));
    if (!seen.insert({p, c}).second) {
      throw InvalidGraph("Dag: duplicate edge " + std::to_string(p) + "->" + std::to_string(c));
    }
    parents_[c].push_back(p);
    children_[p].push_back(c);
  }
  for (auto& ps : parents_) std::sort(ps.begin(), ps.end());
  for (auto& cs : children_) std::sort(cs.begin(), cs.end());

  std::vector<int> indegree(node_count_);
  for (int i = 0; i < node_count_; ++i) indegree[i] = static_cast<int>(parents_[i].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < node_count_; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    topo_.push_back(v);
    for (int c : children_[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(topo_.size()) != node_count_) {
    throw CycleDetected("Dag: edges contain a directed cycle");
  }
  rank_.assign(node_count_, 0);
  for (int pos = 0; pos < node_count_; ++pos) rank_[topo_[pos]] = pos;
}

int Dag::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InvalidGraph("Dag: unknown node '" + name + "'");
  return static_cast<int>(it - names_.begin());
}

bool Dag::has_edge(int parent, int child) const {
  const auto& ps = parents_.at(child);
  return std::binary_search(ps.begin(), ps.end(), parent);
}

std::vector<int> Dag::ancestors(int node) const {
  std::vector<char> mark(node_count_, 0);
  std::vector<int> stack(parents_.at(node));
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (int p : parents_[v]) stack.push_back(p);
  }
  std::vector<int> out;
  for (int i = 0; i < node_count_; ++i) {
    if (mark[i]) out.push_back(i);
  }
  return out;
}

std::vector<int> topological_order(const Dag& dag) { return dag.topological_order(); }

void FamilySpec::validate(int node_count) const {
  if (families.empty()) throw InvalidGraph("FamilySpec: no families");
  if (weights.size() != families.size()) throw InvalidGraph("FamilySpec: weight count mismatch");
  for (const auto& fam : families) {
    if (fam.empty()) throw InvalidGraph("FamilySpec: empty family");
    for (std::size_t k = 0; k < fam.size(); ++k) {
      if (fam[k] < 0 || fam[k] >= node_count) throw InvalidGraph("FamilySpec: index out of range");
      if (k > 0 && fam[k] <= fam[k - 1]) throw InvalidGraph("FamilySpec: family not sorted/unique");
    }
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidGraph("FamilySpec: negative weight");
  }
}

FamilySpec uniform_families(std::vector<std::vector<int>> families) {
  FamilySpec spec;
  const double w = families.empty() ? 0.0 : 1.0 / static_cast<double>(families.size());
  spec.weights.assign(families.size(), w);
  spec.families = std::move(families);
  return spec;
}

FamilySpec child_parent_families(const Dag& dag) { return ancestor_families(dag, 1); }

FamilySpec ancestor_families(const Dag& dag, int depth) {
  if (depth < 0) throw InvalidGraph("ancestor_families: depth must be nonnegative");
  const int n = dag.node_count();
  std::vector<std::vector<int>> families(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> dist(n, -1);
    std::queue<int> frontier;
    dist[i] = 0;
    frontier.push(i);
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      if (dist[v] == depth) continue;
      for (int p : dag.parents(v)) {
        if (dist[p] < 0) {
          dist[p] = dist[v] + 1;
          frontier.push(p);
        }
      }
    }
    for (int v = 0; v < n; ++v) {
      if (dist[v] >= 0) families[i].push_back(v);
    }
  }
  return uniform_families(std::move(families));
}

FamilySpec misaligned_families(const Dag& dag, std::uint64_t seed) {
  const int n = dag.node_count();
  Rng rng(seed, 0x6d6973616c69676eull);
  std::vector<std::vector<int>> families(n);
  for (int i = 0; i < n; ++i) {
    const auto& pa = dag.parents(i);
    std::vector<int> pool;
    for (int v = 0; v < n; ++v) {
      if (v != i && !std::binary_search(pa.begin(), pa.end(), v)) pool.push_back(v);
    }
    if (pool.size() < pa.size()) {
      throw InsufficientNodes("misaligned_families: node " + std::to_string(i) + " has " +
                              std::to_string(pa.size()) + " parents but only " +
                              std::to_string(pool.size()) + " candidates");
    }
    // Partial Fisher-Yates: the first |Pa(i)| slots form the sample.
    for (std::size_t k = 0; k < pa.size(); ++k) {
      std::size_t j = k + rng.index(pool.size() - k);
      std::swap(pool[k], pool[j]);
    }
    families[i].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(pa.size()));
    families[i].push_back(i);
    std::sort(families[i].begin(), families[i].end());
  }
  return uniform_families(std::move(families));
}

FamilySpec monolithic_family(int node_count) {
  std::vector<int> all(node_count);
  std::iota(all.begin(), all.end(), 0);
  return FamilySpec{{all}, {1.0}};
}

std::vector<std::vector<int>> hasse_subsets(int k) {
  if (k < 1 || k > 20) throw InvalidGraph("hasse_dag: k must be in [1, 20]");
  std::vector<std::vector<int>> subsets;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<int> s;
    for (int b = 0; b < k; ++b) {
      if (mask & (1u << b)) s.push_back(b + 1);
    }
    subsets.push_back(std::move(s));
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return subsets;
}

Dag hasse_dag(int k) {
  auto subsets = hasse_subsets(k);
  const int n = static_cast<int>(subsets.size());
  std::vector<Edge> edges;
  std::vector<std::string> names;
  for (int a = 0; a < n; ++a) {
    std::string name = "{";
    for (std::size_t t = 0; t < subsets[a].size(); ++t) {
      if (t) name += ",";
      name += std::to_string(subsets[a][t]);
    }
    names.push_back(name + "}");
    for (int b = 0; b < n; ++b) {
      if (subsets[b].size() != subsets[a].size() + 1) continue;
      if (std::includes(subsets[b].begin(), subsets[b].end(), subsets[a].begin(),
                        subsets[a].end())) {
        edges.emplace_back(a, b);
      }
    }
  }
  return Dag(n, std::move(edges), std::move(names));
}

}  // namespace gigan
