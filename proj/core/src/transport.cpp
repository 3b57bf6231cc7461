#include "gigan/transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gigan/errors.hpp"

namespace gigan {

namespace {

struct Tree {
  int m, n;
  std::vector<std::vector<int>> adj;  // node ids: rows 0..m-1, columns m..m+n-1

  Tree(int rows, int cols) : m(rows), n(cols), adj(rows + cols) {}
  void add(int i, int j) {
    adj[i].push_back(m + j);
    adj[m + j].push_back(i);
  }
  void remove(int i, int j) {
    auto drop = [](std::vector<int>& v, int x) { v.erase(std::find(v.begin(), v.end(), x)); };
    drop(adj[i], m + j);
    drop(adj[m + j], i);
  }
  /// Node path from `from` to `to` (inclusive).
  std::vector<int> path(int from, int to) const {
    std::vector<int> parent(adj.size(), -1);
    std::vector<int> queue{from};
    parent[from] = from;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      int x = queue[h];
      if (x == to) break;
      for (int y : adj[x]) {
        if (parent[y] < 0) {
          parent[y] = x;
          queue.push_back(y);
        }
      }
    }
    std::vector<int> out;
    for (int x = to; x != from; x = parent[x]) out.push_back(x);
    out.push_back(from);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

}  // namespace

TransportResult solve_transport(const Eigen::VectorXd& a_in, const Eigen::VectorXd& b_in,
                                const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(a_in.size());
  const int n = static_cast<int>(b_in.size());
  if (m == 0 || n == 0 || cost.rows() != m || cost.cols() != n) {
    throw ShapeMismatch("solve_transport: shape mismatch");
  }
  if ((a_in.array() < -1e-14).any() || (b_in.array() < -1e-14).any()) {
    throw DomainError("solve_transport: negative mass");
  }
  Eigen::VectorXd a = a_in.cwiseMax(0.0);
  Eigen::VectorXd b = b_in.cwiseMax(0.0);
  const double sa = a.sum(), sb = b.sum();
  if (std::abs(sa - sb) > 1e-9 * std::max(1.0, sa)) throw DomainError("solve_transport: unequal total mass");
  if (sb > 0) b *= sa / sb;

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
  std::vector<std::vector<char>> basic(m, std::vector<char>(n, 0));
  Tree tree(m, n);
  {
    Eigen::VectorXd ra = a, rb = b;
    int i = 0, j = 0;
    for (;;) {
      const double q = std::min(ra[i], rb[j]);
      x(i, j) = q;
      basic[i][j] = 1;
      tree.add(i, j);
      const bool row_done = ra[i] <= rb[j];
      ra[i] -= q;
      rb[j] -= q;
      if (i == m - 1 && j == n - 1) break;
      if ((row_done && i < m - 1) || j == n - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  Eigen::VectorXd u(m), v(n);
  int pivots = 0;
  int degenerate_run = 0;
  const int max_pivots = 200000;
  for (;;) {
    // Potentials from the spanning tree, u_0 = 0.
    std::vector<char> seen(m + n, 0);
    std::vector<int> stack{0};
    u[0] = 0.0;
    seen[0] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int other : tree.adj[node]) {
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < m) {
          v[other - m] = cost(node, other - m) - u[node];
        } else {
          u[other] = cost(other, node - m) - v[node - m];
        }
        stack.push_back(other);
      }
    }

    int ei = -1, ej = -1;
    double best = -tol;
    const bool bland = degenerate_run > 2 * (m + n);
    for (int i = 0; i < m && !(bland && ei >= 0); ++i) {
      for (int j = 0; j < n; ++j) {
        if (basic[i][j]) continue;
        const double rc = cost(i, j) - u[i] - v[j];
        if (rc < best) {
          best = rc;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;
    if (++pivots > max_pivots) throw DomainError("solve_transport: pivot limit exceeded");

    auto nodes = tree.path(m + ej, ei);
    // Cells along the path alternate -, +, -, ... starting next to column ej.
    int leave_i = -1, leave_j = -1;
    double theta = HUGE_VAL;
    std::vector<std::pair<int, int>> cells;
    for (std::size_t t = 0; t + 1 < nodes.size(); ++t) {
      int p = nodes[t], q = nodes[t + 1];
      int ci = p < m ? p : q;
      int cj = (p < m ? q : p) - m;
      cells.emplace_back(ci, cj);
      if (t % 2 == 0 && x(ci, cj) < theta) {
        theta = x(ci, cj);
        leave_i = ci;
        leave_j = cj;
      }
    }
    degenerate_run = theta <= 0.0 ? degenerate_run + 1 : 0;
    x(ei, ej) += theta;
    for (std::size_t t = 0; t < cells.size(); ++t) {
      auto [ci, cj] = cells[t];
      x(ci, cj) += (t % 2 == 0) ? -theta : theta;
    }
    x(leave_i, leave_j) = 0.0;
    basic[leave_i][leave_j] = 0;
    tree.remove(leave_i, leave_j);
    basic[ei][ej] = 1;
    tree.add(ei, ej);
  }

  TransportResult res;
  res.plan = x.cwiseMax(0.0);
  res.cost = (res.plan.array() * cost.array()).sum();
  res.u = u;
  res.v = v;
  res.pivots = pivots;
  return res;
}

double transport_cost(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost) {
  return solve_transport(a, b, cost).cost;
}

}  // namespace gigan
