#include "gigan/barrier.hpp"

#include <cmath>
#include <limits>

#include "gigan/errors.hpp"

namespace gigan {

namespace {

double slack(const LinearConstraint& c, const Eigen::VectorXd& z) {
  double s = c.rhs;
  for (auto [k, a] : c.terms) s -= a * z[k];
  return s;
}

/// -t g(z) - sum log s_k; +inf outside the domain.
double merit(const ConcaveProblem& p, const Eigen::VectorXd& z, double t) {
  double phi = 0.0;
  for (const auto& c : p.constraints) {
    const double s = slack(c, z);
    if (!(s > 0.0)) return HUGE_VAL;
    phi -= std::log(s);
  }
  const double g = p.value(z);
  if (!std::isfinite(g)) return HUGE_VAL;
  return phi - t * g;
}

}  // namespace

BarrierResult maximize_concave(const ConcaveProblem& problem, Eigen::VectorXd start, const BarrierOptions& options) {
  const int n = problem.dim;
  if (start.size() != n) throw ShapeMismatch("maximize_concave: start dimension");
  for (const auto& c : problem.constraints) {
    if (!(slack(c, start) > 0.0)) throw DomainError("maximize_concave: start is not strictly feasible");
  }
  const double m = static_cast<double>(problem.constraints.size());
  BarrierResult res;
  Eigen::VectorXd z = std::move(start);
  double t = options.t_initial;
  Eigen::VectorXd grad(n), g(n);
  Eigen::MatrixXd hess(n, n), h(n, n);
  for (;;) {
    // Centering by damped Newton.
    bool centered = false;
    while (res.newton_steps < options.max_newton) {
      ++res.newton_steps;
      g.setZero();
      h.setZero();
      problem.derivatives(z, g, h);
      grad = -t * g;
      hess = t * h;
      for (const auto& c : problem.constraints) {
        const double s = slack(c, z);
        for (auto [k, a] : c.terms) grad[k] += a / s;
        const double inv2 = 1.0 / (s * s);
        for (auto [k, a] : c.terms) {
          for (auto [l, b] : c.terms) hess(k, l) += a * b * inv2;
        }
      }
      const double scale = 1.0 + hess.diagonal().cwiseAbs().maxCoeff();
      hess.diagonal().array() += options.regularization * scale;
      Eigen::VectorXd step = -hess.ldlt().solve(grad);
      if (!step.allFinite()) step = -grad / scale;
      const double decrement = -grad.dot(step);
      if (decrement / 2.0 <= options.newton_tolerance) {
        centered = true;
        break;
      }
      const double phi0 = merit(problem, z, t);
      // Decreases below the rounding error of phi0 are not resolvable.
      const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(phi0);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        Eigen::VectorXd trial = z + alpha * step;
        const double phi = merit(problem, trial, t);
        if (phi <= phi0 - 0.25 * alpha * decrement + noise) {
          z = std::move(trial);
          moved = phi0 - phi > noise;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) {
        centered = true;  // no resolvable progress
        break;
      }
    }
    if (!centered) break;
    if (m == 0.0 || m / t < options.gap_tolerance) {
      res.converged = true;
      break;
    }
    t *= options.t_growth;
  }
  res.z = z;
  res.value = problem.value(z);
  return res;
}

}  // namespace gigan
