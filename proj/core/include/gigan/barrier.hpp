#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace gigan {

/// sum_k coef_k z_{index_k} <= rhs
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

struct ConcaveProblem {
  int dim = 0;
  /// Concave objective; may return NaN or -inf outside its domain.
  std::function<double(const Eigen::VectorXd&)> value;
  /// Gradient of the objective and the (positive semidefinite) negated Hessian.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)> derivatives;
  std::vector<LinearConstraint> constraints;
};

struct BarrierOptions {
  /// Target bound on constraints / t (the barrier duality gap).
  double gap_tolerance = 1e-10;
  double newton_tolerance = 1e-12;
  double t_initial = 1.0;
  double t_growth = 20.0;
  int max_newton = 2000;
  double regularization = 1e-11;
};

struct BarrierResult {
  Eigen::VectorXd z;
  double value = 0.0;
  bool converged = false;
  int newton_steps = 0;
};

/// Maximizes a smooth concave function over a polyhedron with the
/// log-barrier interior-point method (damped Newton, backtracking).
/// `start` must be strictly feasible.
BarrierResult maximize_concave(const ConcaveProblem& problem, Eigen::VectorXd start,
                               const BarrierOptions& options = {});

}  // namespace gigan
