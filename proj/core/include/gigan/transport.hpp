#pragma once

#include <Eigen/Dense>

namespace gigan {

struct TransportResult {
  double cost = 0.0;
  Eigen::MatrixXd plan;
  /// Optimal dual potentials: u_i + v_j <= c_ij, cost = a.u + b.v.
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  int pivots = 0;
};

/// Exact discrete optimal transport min <C, pi> over couplings of (a, b),
/// by the transportation simplex (north-west corner start, u-v potentials,
/// spanning-tree basis). Masses must be nonnegative with equal totals.
TransportResult solve_transport(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost);

/// Transport cost only.
double transport_cost(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost);

}  // namespace gigan
