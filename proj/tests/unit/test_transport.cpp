#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "gigan/errors.hpp"
#include "gigan/transport.hpp"
#include "support.hpp"

using namespace gigan;

namespace {

/// Optimal transport between uniform n-point measures: a Birkhoff vertex, so
/// the minimum over permutations.
double permutation_cost(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = HUGE_VAL;
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += c(i, perm[i]);
    best = std::min(best, s / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("uniform measures match the permutation brute force") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 2 + trial % 5;
      Eigen::MatrixXd c(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) c(i, j) = rng.uniform();
      }
      const Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / n);
      CHECK(std::abs(transport_cost(u, u, c) - permutation_cost(c)) < 1e-12);
    }
  }

  TEST_CASE("plan marginals, dual feasibility and zero duality gap") {
    Rng rng(43);
    for (int trial = 0; trial < 60; ++trial) {
      const int n = 1 + static_cast<int>(rng.index(9)), m = 1 + static_cast<int>(rng.index(9));
      Eigen::VectorXd a = gigan::testing::dirichlet(rng, n, 0.5);
      Eigen::VectorXd b = gigan::testing::dirichlet(rng, m, 0.5);
      Eigen::MatrixXd c(n, m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) c(i, j) = 3.0 * rng.uniform();
      }
      const auto r = solve_transport(a, b, c);
      CHECK((r.plan.rowwise().sum() - a).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((r.plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(r.plan.minCoeff() >= -1e-15);
      CHECK(std::abs((r.plan.array() * c.array()).sum() - r.cost) < 1e-12);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) CHECK(r.u[i] + r.v[j] <= c(i, j) + 1e-10);
      }
      CHECK(std::abs(a.dot(r.u) + b.dot(r.v) - r.cost) < 1e-10);
    }
  }

  TEST_CASE("one-dimensional closed form") {
    // Bern(q) vs Bern(p) under |x - y|: the cost is |q - p|.
    Eigen::MatrixXd c(2, 2);
    c << 0, 1, 1, 0;
    Eigen::VectorXd a(2), b(2);
    a << 0.3, 0.7;
    b << 0.8, 0.2;
    CHECK(transport_cost(a, b, c) == doctest::Approx(0.5));
    CHECK(transport_cost(a, a, c) == 0.0);
  }

  TEST_CASE("invalid inputs") {
    Eigen::VectorXd a(2), b(2);
    a << 0.5, 0.5;
    b << 0.5, 0.6;
    CHECK_THROWS(transport_cost(a, b, Eigen::MatrixXd::Zero(2, 2)));
    CHECK_THROWS(transport_cost(a, a, Eigen::MatrixXd::Zero(3, 2)));
  }
}
