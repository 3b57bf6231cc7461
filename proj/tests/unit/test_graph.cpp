#include <doctest.h>

#include <algorithm>
#include <set>

#include "gigan/errors.hpp"
#include "gigan/graph.hpp"
#include "gigan/rng.hpp"

using namespace gigan;

namespace {

Dag random_dag(Rng& rng, int n, double density) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(std::span<int>(perm));
  std::vector<Edge> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (rng.uniform() < density) edges.emplace_back(perm[a], perm[b]);
    }
  }
  return Dag(n, edges);
}

std::vector<int> family(std::initializer_list<int> v) { return std::vector<int>(v); }

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("topological order examples") {
    CHECK(topological_order(Dag(3, {{0, 1}, {1, 2}})) == family({0, 1, 2}));
    CHECK(topological_order(Dag(3, {})) == family({0, 1, 2}));
    CHECK(topological_order(Dag(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}})) == family({0, 1, 2, 3}));
    CHECK(topological_order(Dag(3, {{2, 0}, {1, 0}})) == family({1, 2, 0}));
  }

  TEST_CASE("invalid graphs are rejected") {
    CHECK_THROWS_AS(Dag(3, {{0, 1}, {1, 2}, {2, 0}}), CycleDetected);
    CHECK_THROWS_AS(Dag(2, {{0, 0}}), InvalidGraph);
    CHECK_THROWS_AS(Dag(2, {{0, 1}, {0, 1}}), InvalidGraph);
    CHECK_THROWS_AS(Dag(2, {{0, 2}}), InvalidGraph);
  }

  TEST_CASE("random DAGs: order is a permutation respecting edges") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
      Dag d = random_dag(rng, 2 + static_cast<int>(rng.index(12)), 0.3);
      const auto& order = d.topological_order();
      std::vector<int> sorted = order;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < d.node_count(); ++i) CHECK(sorted[i] == i);
      for (auto [p, c] : d.edges()) CHECK(d.topological_rank()[p] < d.topological_rank()[c]);
    }
  }

  TEST_CASE("child-parent families") {
    auto f = child_parent_families(Dag(3, {{0, 1}, {1, 2}}));
    CHECK(f.families == std::vector<std::vector<int>>{{0}, {0, 1}, {1, 2}});
    for (double w : f.weights) CHECK(w == doctest::Approx(1.0 / 3.0));
    auto e = child_parent_families(Dag(3, {}));
    CHECK(e.families == std::vector<std::vector<int>>{{0}, {1}, {2}});
  }

  TEST_CASE("ancestor families") {
    Dag chain(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(ancestor_families(chain, 1).families == child_parent_families(chain).families);
    CHECK(ancestor_families(chain, 0).families == std::vector<std::vector<int>>{{0}, {1}, {2}, {3}});
    CHECK(ancestor_families(chain, 3).families[3] == family({0, 1, 2, 3}));
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
      Dag d = random_dag(rng, 8, 0.35);
      for (int a = 0; a < 8; ++a) {
        auto lo = ancestor_families(d, a), hi = ancestor_families(d, a + 1);
        for (int i = 0; i < 8; ++i) {
          CHECK(std::includes(hi.families[i].begin(), hi.families[i].end(), lo.families[i].begin(),
                              lo.families[i].end()));
        }
      }
      auto full = ancestor_families(d, 8);
      for (int i = 0; i < 8; ++i) {
        auto expect = d.ancestors(i);
        expect.push_back(i);
        std::sort(expect.begin(), expect.end());
        CHECK(full.families[i] == expect);
      }
    }
  }

  TEST_CASE("misaligned families") {
    Dag chain(3, {{0, 1}, {1, 2}});
    auto m = misaligned_families(chain, 5);
    CHECK(m.families[0] == family({0}));
    CHECK(m.families[2] == family({0, 2}));
    Dag h = hasse_dag(3);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto f = misaligned_families(h, seed);
      for (int i = 0; i < h.node_count(); ++i) {
        const auto& pa = h.parents(i);
        CHECK(f.families[i].size() == pa.size() + 1);
        for (int p : pa) CHECK(std::find(f.families[i].begin(), f.families[i].end(), p) == f.families[i].end());
        CHECK(std::find(f.families[i].begin(), f.families[i].end(), i) != f.families[i].end());
      }
    }
    CHECK(misaligned_families(h, 3).families == misaligned_families(h, 3).families);
    CHECK_THROWS_AS(misaligned_families(Dag(2, {{0, 1}}), 0), InsufficientNodes);
  }

  TEST_CASE("hasse lattice") {
    CHECK(hasse_dag(1).node_count() == 2);
    CHECK(hasse_dag(1).edge_count() == 1);
    CHECK(hasse_dag(2).node_count() == 4);
    CHECK(hasse_dag(2).edge_count() == 4);
    Dag h = hasse_dag(3);
    CHECK(h.node_count() == 8);
    CHECK(h.edge_count() == 12);
    auto subsets = hasse_subsets(3);
    for (auto [p, c] : h.edges()) CHECK(subsets[c].size() == subsets[p].size() + 1);
    for (std::size_t k = 1; k < subsets.size(); ++k) CHECK(subsets[k - 1].size() <= subsets[k].size());
  }

  TEST_CASE("family spec validation") {
    FamilySpec bad = uniform_families({{1, 0}});
    CHECK_THROWS_AS(bad.validate(2), InvalidGraph);
    FamilySpec empty = uniform_families({{}});
    CHECK_THROWS_AS(empty.validate(2), InvalidGraph);
    CHECK(monolithic_family(3).families == std::vector<std::vector<int>>{{0, 1, 2}});
  }
}
