#pragma once

#include <vector>

#include "gigan/barrier.hpp"
#include "gigan/oracle.hpp"

namespace gigan::detail {

/// gamma = map * z with linear constraints on z.
struct GammaParameterization {
  Eigen::MatrixXd map;
  std::vector<LinearConstraint> constraints;
  bool unconstrained = false;  // AllBounded
};

/// Lipschitz constraints gamma_x - gamma_y <= L d(x, y), keeping only pairs
/// not implied by the triangle inequality through a third point.
std::vector<LinearConstraint> lipschitz_constraints(const Eigen::MatrixXd& d, double L, int offset = 0);

GammaParameterization parameterize(const FinitePmf& grid, const DivergenceSpec& spec);

/// sup_z a.z - Lambda_f^{base}[B z].
struct DualSetup {
  Vector a;
  Eigen::MatrixXd B;
  Vector base;
  FKind f = FKind::KL;
  std::vector<LinearConstraint> constraints;
};

struct DualSolution {
  double value = 0.0;
  Vector z;
  Vector s;  // B z
  double nu = 0.0;
  bool converged = false;
};

DualSolution solve_dual(const DualSetup& setup, const OracleTolerances& tol);

FiniteMetric metric_for(const FinitePmf& grid, const DivergenceSpec& spec);

}  // namespace gigan::detail
