#include <doctest.h>

#include "gigan/errors.hpp"
#include "gigan/pmf.hpp"
#include "support.hpp"

using namespace gigan;

TEST_SUITE("pmf") {
  TEST_CASE("grid indexing is lexicographic with the last variable fastest") {
    FinitePmf u = FinitePmf::uniform({0, 1}, {2, 3});
    CHECK(u.size() == 6);
    CHECK(u.point(0) == std::vector<int>{0, 0});
    CHECK(u.point(1) == std::vector<int>{0, 1});
    CHECK(u.point(3) == std::vector<int>{1, 0});
    for (int k = 0; k < 6; ++k) CHECK(u.index_of(u.point(k)) == k);
  }

  TEST_CASE("marginalize matches explicit sums") {
    Rng rng(3);
    FinitePmf grid = FinitePmf::uniform({0, 1, 2}, {2, 3, 2});
    FinitePmf p = grid.with_probs(testing::dirichlet(rng, grid.size()));
    const std::vector<int> keep = {0, 2};
    FinitePmf m = marginalize(p, keep);
    CHECK(m.size() == 4);
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        double s = 0.0;
        for (int b = 0; b < 3; ++b) s += p[p.index_of(std::vector<int>{a, b, c})];
        CHECK(m[m.index_of(std::vector<int>{a, c})] == doctest::Approx(s).epsilon(1e-14));
      }
    }
    const std::vector<int> all = {0, 1, 2};
    CHECK((marginalize(p, all).probs() - p.probs()).cwiseAbs().maxCoeff() < 1e-15);
    auto idx = projection_index(p, keep);
    for (int x = 0; x < p.size(); ++x) {
      auto pt = p.point(x);
      CHECK(idx[x] == m.index_of(std::vector<int>{pt[0], pt[2]}));
    }
  }

  TEST_CASE("independent pair marginal is the first factor") {
    Vector a(2), b(3);
    a << 0.3, 0.7;
    b << 0.2, 0.5, 0.3;
    Vector joint(6);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 3; ++j) joint[i * 3 + j] = a[i] * b[j];
    }
    FinitePmf p({0, 1}, {2, 3}, joint);
    const std::vector<int> keep = {0};
    CHECK((marginalize(p, keep).probs() - a).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("metrics") {
    const std::vector<int> cards = {3, 2};
    auto l1 = FiniteMetric::l1(cards);
    FinitePmf g = FinitePmf::uniform({0, 1}, {3, 2});
    for (int x = 0; x < 6; ++x) {
      for (int y = 0; y < 6; ++y) {
        auto a = g.point(x), b = g.point(y);
        CHECK(l1.d(x, y) == std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]));
      }
    }
    l1.validate();
    auto h = FiniteMetric::hamming(cards);
    CHECK(h.d(0, 5) == 2.0);
    auto disc = FiniteMetric::discrete(4, 2.5);
    CHECK(disc.d(1, 2) == 2.5);
    CHECK(disc.d(3, 3) == 0.0);
  }

  TEST_CASE("invalid pmfs are rejected") {
    Vector bad(2);
    bad << 0.5, 0.6;
    CHECK_THROWS(FinitePmf({0}, {2}, bad));
    Vector neg(2);
    neg << -0.1, 1.1;
    CHECK_THROWS(FinitePmf({0}, {2}, neg));
    const std::vector<int> big = {1000, 1000, 1000};
    CHECK_THROWS_AS(grid_size(big), StateSpaceTooLarge);
  }
}
