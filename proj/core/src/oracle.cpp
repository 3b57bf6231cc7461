#include "gigan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gigan/errors.hpp"
#include "oracle_internal.hpp"

namespace gigan {

namespace {

constexpr double kHalfLog2 = 0.5 * std::numbers::ln2;

double divergence_term(FKind f, double r, double p) {
  if (p > 0.0) return p * f_value(f, r / p);
  if (r == 0.0) return 0.0;
  return f == FKind::KL ? HUGE_VAL : r * f_recession(f);
}

double divergence_term_grad(FKind f, double r, double p) {
  if (p > 0.0) return f_derivative(f, r / p);
  return f_recession(f);
}

}  // namespace

GammaClass GammaClass::all_bounded() { return {Kind::AllBounded, 1.0, {}}; }

GammaClass GammaClass::lipschitz(double L) {
  if (!(L > 0.0)) throw DomainError("GammaClass: L must be positive");
  return {Kind::Lipschitz, L, {}};
}

GammaClass GammaClass::sup_bounded(double c) {
  if (!(c > 0.0)) throw DomainError("GammaClass: c must be positive");
  return {Kind::SupBounded, c, {}};
}

GammaClass GammaClass::additive(FamilySpec families, double L) {
  if (!(L > 0.0)) throw DomainError("GammaClass: L must be positive");
  return {Kind::AdditiveFamilies, L, std::move(families)};
}

std::string to_string(GammaClass::Kind kind) {
  switch (kind) {
    case GammaClass::Kind::AllBounded: return "all_bounded";
    case GammaClass::Kind::Lipschitz: return "lipschitz";
    case GammaClass::Kind::SupBounded: return "sup_bounded";
    case GammaClass::Kind::AdditiveFamilies: return "additive";
  }
  return "lipschitz";
}

double f_divergence(const Vector& q, const Vector& p, FKind f) {
  if (q.size() != p.size()) throw ShapeMismatch("f_divergence: support mismatch");
  double total = 0.0;
  for (Eigen::Index x = 0; x < q.size(); ++x) total += divergence_term(f, q[x], p[x]);
  return std::isinf(total) ? total : std::max(0.0, total);
}

double f_divergence(const FinitePmf& q, const FinitePmf& p, FKind f) {
  if (!q.same_grid(p)) throw ShapeMismatch("f_divergence: grids differ");
  return f_divergence(q.probs(), p.probs(), f);
}

double oracle_conjugate(FKind f, double s) {
  if (f == FKind::KL) return std::exp(s - 1.0);
  if (!(s < kHalfLog2)) throw DomainError("oracle_conjugate(JS): argument outside the domain");
  return -0.5 * std::log(2.0 - std::exp(2.0 * s));
}

double oracle_conjugate_derivative(FKind f, double s) {
  if (f == FKind::KL) return std::exp(s - 1.0);
  if (!(s < kHalfLog2)) throw DomainError("oracle_conjugate(JS): argument outside the domain");
  const double e = std::exp(2.0 * s);
  return e / (2.0 - e);
}

namespace detail {

FiniteMetric metric_for(const FinitePmf& grid, const DivergenceSpec& spec) {
  if (spec.metric) {
    if (spec.metric->size() != grid.size()) {
      throw MetricMissing("metric size " + std::to_string(spec.metric->size()) + " does not match support size " +
                          std::to_string(grid.size()));
    }
    return *spec.metric;
  }
  return FiniteMetric::l1(grid.cardinalities());
}

std::vector<LinearConstraint> lipschitz_constraints(const Eigen::MatrixXd& d, double L, int offset) {
  const int n = static_cast<int>(d.rows());
  std::vector<LinearConstraint> out;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      if (!(d(x, y) > 0.0)) throw DomainError("Lipschitz class needs a metric separating points");
      bool implied = false;
      for (int z = 0; z < n && !implied; ++z) {
        if (z != x && z != y && d(x, z) + d(z, y) <= d(x, y) * (1.0 + 1e-12)) implied = true;
      }
      if (!implied) out.push_back({{{offset + x, 1.0}, {offset + y, -1.0}}, L * d(x, y)});
    }
  }
  return out;
}

GammaParameterization parameterize(const FinitePmf& grid, const DivergenceSpec& spec) {
  GammaParameterization g;
  const int n = grid.size();
  switch (spec.gamma.kind) {
    case GammaClass::Kind::AllBounded:
      g.map = Eigen::MatrixXd::Identity(n, n);
      g.unconstrained = true;
      break;
    case GammaClass::Kind::Lipschitz:
      g.map = Eigen::MatrixXd::Identity(n, n);
      g.constraints = lipschitz_constraints(metric_for(grid, spec).d, spec.gamma.bound);
      break;
    case GammaClass::Kind::SupBounded:
      g.map = Eigen::MatrixXd::Identity(n, n);
      for (int x = 0; x < n; ++x) {
        g.constraints.push_back({{{x, 1.0}}, spec.gamma.bound});
        g.constraints.push_back({{{x, -1.0}}, spec.gamma.bound});
      }
      break;
    case GammaClass::Kind::AdditiveFamilies: {
      const auto& fams = spec.gamma.families;
      int total = 0;
      std::vector<std::vector<int>> projections;
      std::vector<int> offsets;
      for (const auto& fam : fams.families) {
        std::vector<int> cards;
        for (int v : fam) {
          auto it = std::find(grid.variables().begin(), grid.variables().end(), v);
          if (it == grid.variables().end()) throw ShapeMismatch("additive class: family variable not in support");
          cards.push_back(grid.cardinalities()[it - grid.variables().begin()]);
        }
        offsets.push_back(total);
        projections.push_back(projection_index(grid, fam));
        auto cons = lipschitz_constraints(FiniteMetric::l1(cards).d, spec.gamma.bound, total);
        g.constraints.insert(g.constraints.end(), cons.begin(), cons.end());
        total += static_cast<int>(grid_size(cards));
      }
      g.map = Eigen::MatrixXd::Zero(n, total);
      for (std::size_t i = 0; i < projections.size(); ++i) {
        for (int x = 0; x < n; ++x) g.map(x, offsets[i] + projections[i][x]) = 1.0;
      }
      break;
    }
  }
  return g;
}

DualSolution solve_dual(const DualSetup& setup, const OracleTolerances& tol) {
  const int k = static_cast<int>(setup.a.size());
  const int m = static_cast<int>(setup.base.size());
  const bool js = setup.f == FKind::JS;
  const int dim = js ? k + 1 : k;
  ConcaveProblem prob;
  prob.dim = dim;
  prob.constraints = setup.constraints;
  if (js) {
    // s_x - nu < log(2) / 2 on every point of the P grid.
    for (int x = 0; x < m; ++x) {
      LinearConstraint c;
      for (int j = 0; j < k; ++j) {
        if (setup.B(x, j) != 0.0) c.terms.emplace_back(j, setup.B(x, j));
      }
      c.terms.emplace_back(k, -1.0);
      c.rhs = kHalfLog2;
      prob.constraints.push_back(std::move(c));
    }
  }
  const Vector& base = setup.base;
  const Eigen::MatrixXd& B = setup.B;
  if (!js) {
    prob.value = [&](const Vector& z) {
      Vector s = B * z;
      double mx = -HUGE_VAL;
      for (int x = 0; x < m; ++x) {
        if (base[x] > 0) mx = std::max(mx, s[x]);
      }
      double zsum = 0.0;
      for (int x = 0; x < m; ++x) {
        if (base[x] > 0) zsum += base[x] * std::exp(s[x] - mx);
      }
      return setup.a.dot(z) - mx - std::log(zsum);
    };
    prob.derivatives = [&](const Vector& z, Vector& grad, Eigen::MatrixXd& neg_hess) {
      Vector s = B * z;
      double mx = -HUGE_VAL;
      for (int x = 0; x < m; ++x) {
        if (base[x] > 0) mx = std::max(mx, s[x]);
      }
      Vector w = Vector::Zero(m);
      for (int x = 0; x < m; ++x) {
        if (base[x] > 0) w[x] = base[x] * std::exp(s[x] - mx);
      }
      w /= w.sum();
      grad = setup.a - B.transpose() * w;
      Vector bw = B.transpose() * w;
      neg_hess = B.transpose() * w.asDiagonal() * B - bw * bw.transpose();
    };
  } else {
    prob.value = [&](const Vector& zn) {
      Vector z = zn.head(k);
      const double nu = zn[k];
      Vector s = B * z;
      double total = setup.a.dot(z) - nu;
      for (int x = 0; x < m; ++x) {
        if (base[x] <= 0) continue;
        const double e = std::exp(2.0 * (s[x] - nu));
        if (!(e < 2.0)) return -HUGE_VAL;
        total += 0.5 * base[x] * std::log(2.0 - e);
      }
      return total;
    };
    prob.derivatives = [&](const Vector& zn, Vector& grad, Eigen::MatrixXd& neg_hess) {
      Vector z = zn.head(k);
      const double nu = zn[k];
      Vector s = B * z;
      Vector d1 = Vector::Zero(m), d2 = Vector::Zero(m);
      for (int x = 0; x < m; ++x) {
        if (base[x] <= 0) continue;
        const double e = std::exp(2.0 * (s[x] - nu));
        const double den = 2.0 - e;
        d1[x] = base[x] * e / den;
        d2[x] = base[x] * 4.0 * e / (den * den);
      }
      grad.resize(dim);
      grad.head(k) = setup.a - B.transpose() * d1;
      grad[k] = -1.0 + d1.sum();
      neg_hess.setZero(dim, dim);
      neg_hess.topLeftCorner(k, k) = B.transpose() * d2.asDiagonal() * B;
      Vector cross = -(B.transpose() * d2);
      neg_hess.topRightCorner(k, 1) = cross;
      neg_hess.bottomLeftCorner(1, k) = cross.transpose();
      neg_hess(k, k) = d2.sum();
    };
  }
  BarrierOptions opts;
  opts.gap_tolerance = tol.barrier_gap;
  auto res = maximize_concave(prob, Vector::Zero(dim), opts);
  DualSolution sol;
  sol.value = res.value;
  sol.z = res.z.head(k);
  sol.s = B * sol.z;
  sol.converged = res.converged;
  if (js) {
    sol.nu = res.z[k];
  } else {
    double mx = -HUGE_VAL;
    for (int x = 0; x < m; ++x) {
      if (base[x] > 0) mx = std::max(mx, sol.s[x]);
    }
    double zsum = 0.0;
    for (int x = 0; x < m; ++x) {
      if (base[x] > 0) zsum += base[x] * std::exp(sol.s[x] - mx);
    }
    sol.nu = mx + std::log(zsum);
  }
  return sol;
}

}  // namespace detail

using detail::DualSetup;
using detail::solve_dual;

double ipm(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec) {
  if (!q.same_grid(p)) throw ShapeMismatch("ipm: grids differ");
  const Vector& a = q.probs();
  const Vector& b = p.probs();
  switch (spec.gamma.kind) {
    case GammaClass::Kind::AllBounded:
      return (a - b).cwiseAbs().maxCoeff() == 0.0 ? 0.0 : HUGE_VAL;
    case GammaClass::Kind::Lipschitz:
      return spec.gamma.bound * transport_cost(a, b, detail::metric_for(q, spec).d);
    case GammaClass::Kind::SupBounded:
      return spec.gamma.bound * (a - b).cwiseAbs().sum();
    case GammaClass::Kind::AdditiveFamilies: {
      double total = 0.0;
      for (const auto& fam : spec.gamma.families.families) {
        FinitePmf qf = marginalize(q, fam);
        FinitePmf pf = marginalize(p, fam);
        total += spec.gamma.bound * transport_cost(qf.probs(), pf.probs(), FiniteMetric::l1(qf.cardinalities()).d);
      }
      return total;
    }
  }
  return 0.0;
}

namespace {

struct CouplingResult {
  Vector r;
  bool converged = false;
  int iterations = 0;
};

/// Entropic mirror descent over couplings pi with row sums q for
/// <C, pi> + w D_f(pi^T 1 || p), with adaptive step size.
CouplingResult minimize_coupling(const Vector& q, const Vector& p, const Eigen::MatrixXd& C, double w, FKind f,
                                 const OracleTolerances& tol) {
  const int n = static_cast<int>(q.size());
  const int m = static_cast<int>(p.size());
  std::vector<char> allowed(m, 1);
  if (f == FKind::KL) {
    for (int y = 0; y < m; ++y) allowed[y] = p[y] > 0.0;
  }
  Vector start(m);
  for (int y = 0; y < m; ++y) start[y] = allowed[y] ? (f == FKind::KL ? p[y] : 0.5 * p[y] + 0.5 / m) : 0.0;
  start /= start.sum();
  Eigen::MatrixXd pi = q * start.transpose();

  auto objective = [&](const Eigen::MatrixXd& plan, Vector& r) {
    r = plan.colwise().sum().transpose();
    double v = (plan.array() * C.array()).sum();
    for (int y = 0; y < m; ++y) v += w * divergence_term(f, r[y], p[y]);
    return v;
  };
  auto gradient = [&](const Vector& r) {
    Eigen::MatrixXd G = C;
    for (int y = 0; y < m; ++y) {
      if (!allowed[y]) continue;
      G.col(y).array() += w * divergence_term_grad(f, r[y], p[y]);
    }
    return G;
  };

  CouplingResult res;
  Vector r;
  double F = objective(pi, r);
  double eta = 1.0 / w;
  const double eta_max = 64.0 / w;
  for (res.iterations = 0; res.iterations < tol.max_iterations; ++res.iterations) {
    Eigen::MatrixXd G = gradient(r);
    double lin = 0.0, best = 0.0;
    for (int x = 0; x < n; ++x) {
      if (q[x] <= 0.0) continue;
      double mn = HUGE_VAL;
      for (int y = 0; y < m; ++y) {
        if (allowed[y]) mn = std::min(mn, G(x, y));
      }
      best += q[x] * mn;
      for (int y = 0; y < m; ++y) {
        if (allowed[y]) lin += pi(x, y) * G(x, y);
      }
    }
    const double gap = lin - best;
    if (gap <= tol.frank_wolfe_gap * std::max(1.0, std::abs(F))) {
      res.converged = true;
      break;
    }
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, m);
      for (int x = 0; x < n; ++x) {
        if (q[x] <= 0.0) continue;
        double mn = HUGE_VAL;
        for (int y = 0; y < m; ++y) {
          if (allowed[y] && pi(x, y) > 0) mn = std::min(mn, G(x, y));
        }
        double total = 0.0;
        for (int y = 0; y < m; ++y) {
          if (!allowed[y] || pi(x, y) <= 0) continue;
          next(x, y) = pi(x, y) * std::exp(-eta * (G(x, y) - mn));
          total += next(x, y);
        }
        next.row(x) *= q[x] / total;
      }
      Vector r_next;
      const double F_next = objective(next, r_next);
      double bregman = 0.0, inner = 0.0;
      for (int x = 0; x < n; ++x) {
        for (int y = 0; y < m; ++y) {
          if (next(x, y) > 0) bregman += next(x, y) * std::log(next(x, y) / pi(x, y));
          if (allowed[y]) inner += G(x, y) * (next(x, y) - pi(x, y));
        }
      }
      if (F_next <= F + inner + bregman / eta + 1e-15 * std::max(1.0, std::abs(F)) || eta <= 1e-3 / w) {
        pi = std::move(next);
        r = std::move(r_next);
        F = F_next;
        eta = std::min(eta * 1.5, eta_max);
        break;
      }
      eta *= 0.5;
    }
  }
  res.r = pi.colwise().sum().transpose();
  return res;
}

/// Exact value of the infimal-convolution objective at R.
double exact_value(const Vector& q, const Vector& r, const Vector& p, const Eigen::MatrixXd& C, double w, FKind f) {
  const double d = f_divergence(r, p, f);
  if (std::isinf(d)) return d;
  return transport_cost(q, r, C) + w * d;
}

PrimalResult infimal_convolution(const Vector& q, const Vector& p, const Eigen::MatrixXd& C, double w, FKind f,
                                 const OracleTolerances& tol) {
  PrimalResult res;
  auto cr = minimize_coupling(q, p, C, w, f, tol);
  res.iterations = cr.iterations;
  res.converged = cr.converged;
  Vector r = cr.r / cr.r.sum();
  res.value = exact_value(q, r, p, C, w, f);
  res.r_star = r;
  res.source = "interior";
  const double at_q = w * f_divergence(q, p, f);
  const double at_p = transport_cost(q, p, C);
  if (at_q < res.value) {
    res.value = at_q;
    res.r_star = q;
    res.source = "R=Q";
  }
  if (at_p < res.value) {
    res.value = at_p;
    res.r_star = p;
    res.source = "R=P";
  }
  res.value = std::max(0.0, res.value);
  return res;
}

/// Mirror descent over R with LP-dual subgradients of the additive IPM part.
PrimalResult additive_primal(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec,
                             const OracleTolerances& tol) {
  const auto& fams = spec.gamma.families.families;
  const int n = q.size();
  std::vector<std::vector<int>> proj;
  std::vector<Eigen::MatrixXd> metrics;
  for (const auto& fam : fams) {
    proj.push_back(projection_index(q, fam));
    metrics.push_back(FiniteMetric::l1(marginalize(q, fam).cardinalities()).d);
  }
  const double L = spec.gamma.bound;
  auto evaluate = [&](const Vector& r, Vector* grad) {
    double d = f_divergence(r, p.probs(), spec.f);
    if (std::isinf(d)) return d;
    double v = d;
    if (grad) {
      grad->resize(n);
      for (int x = 0; x < n; ++x) (*grad)[x] = divergence_term_grad(spec.f, r[x], p[x]);
    }
    for (std::size_t i = 0; i < fams.size(); ++i) {
      const int nf = static_cast<int>(metrics[i].rows());
      Vector qf = Vector::Zero(nf), rf = Vector::Zero(nf);
      for (int x = 0; x < n; ++x) {
        qf[proj[i][x]] += q[x];
        rf[proj[i][x]] += r[x];
      }
      auto t = solve_transport(qf, rf, metrics[i]);
      v += L * t.cost;
      if (grad) {
        for (int x = 0; x < n; ++x) (*grad)[x] += L * t.v[proj[i][x]];
      }
    }
    return v;
  };
  PrimalResult res;
  Vector r(n);
  for (int x = 0; x < n; ++x) r[x] = spec.f == FKind::KL ? p[x] : 0.5 * (p[x] + q[x]);
  r /= r.sum();
  double best = evaluate(r, nullptr);
  Vector best_r = r;
  const int iters = std::min(tol.max_iterations, 4000);
  for (int t = 1; t <= iters; ++t) {
    Vector g;
    evaluate(r, &g);
    for (int x = 0; x < n; ++x) {
      if (!std::isfinite(g[x])) g[x] = 0.0;
    }
    const double eta = 0.5 / std::sqrt(static_cast<double>(t));
    const double shift = g.maxCoeff();
    for (int x = 0; x < n; ++x) {
      if (r[x] > 0) r[x] *= std::exp(-eta * (g[x] - shift));
    }
    r /= r.sum();
    const double v = evaluate(r, nullptr);
    if (v < best) {
      best = v;
      best_r = r;
    }
    res.iterations = t;
  }
  res.value = best;
  res.r_star = best_r;
  res.source = "interior";
  res.converged = true;
  const double at_q = f_divergence(q.probs(), p.probs(), spec.f);
  if (at_q < res.value) {
    res.value = at_q;
    res.r_star = q.probs();
    res.source = "R=Q";
  }
  const double at_p = ipm(q, p, spec);
  if (at_p < res.value) {
    res.value = at_p;
    res.r_star = p.probs();
    res.source = "R=P";
  }
  return res;
}

}  // namespace

PrimalResult f_gamma_divergence(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec,
                                const OracleTolerances& tol) {
  if (!q.same_grid(p)) throw ShapeMismatch("f_gamma_divergence: grids differ");
  const int n = q.size();
  switch (spec.gamma.kind) {
    case GammaClass::Kind::AllBounded: {
      PrimalResult res;
      res.value = f_divergence(q, p, spec.f);
      res.r_star = q.probs();
      res.converged = true;
      res.source = "R=Q";
      return res;
    }
    case GammaClass::Kind::Lipschitz:
      return infimal_convolution(q.probs(), p.probs(), spec.gamma.bound * detail::metric_for(q, spec).d, 1.0, spec.f,
                                 tol);
    case GammaClass::Kind::SupBounded: {
      Eigen::MatrixXd C = Eigen::MatrixXd::Constant(n, n, 2.0 * spec.gamma.bound);
      C.diagonal().setZero();
      return infimal_convolution(q.probs(), p.probs(), C, 1.0, spec.f, tol);
    }
    case GammaClass::Kind::AdditiveFamilies:
      return additive_primal(q, p, spec, tol);
  }
  return {};
}

DualResult f_gamma_dual(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec,
                        const OracleTolerances& tol) {
  if (!q.same_grid(p)) throw ShapeMismatch("f_gamma_dual: grids differ");
  const Vector& qv = q.probs();
  const Vector& pv = p.probs();
  DualResult res;
  if (spec.gamma.kind == GammaClass::Kind::AllBounded) {
    res.value = f_divergence(qv, pv, spec.f);
    res.gamma.resize(q.size());
    for (int x = 0; x < q.size(); ++x) {
      if (pv[x] <= 0) {
        res.gamma[x] = spec.f == FKind::KL ? HUGE_VAL : kHalfLog2;
      } else if (qv[x] <= 0) {
        res.gamma[x] = -HUGE_VAL;
      } else {
        res.gamma[x] = spec.f == FKind::KL ? std::log(qv[x] / pv[x]) : f_derivative(FKind::JS, qv[x] / pv[x]);
      }
    }
    res.nu = 0.0;
    res.converged = true;
    return res;
  }
  auto param = detail::parameterize(q, spec);
  DualSetup setup;
  setup.a = param.map.transpose() * qv;
  setup.B = param.map;
  setup.base = pv;
  setup.f = spec.f;
  setup.constraints = std::move(param.constraints);
  auto sol = solve_dual(setup, tol);
  res.value = std::max(0.0, sol.value);
  res.gamma = sol.s;
  res.nu = sol.nu;
  res.converged = sol.converged;
  return res;
}

double optimality_residual(const Vector& p, const Vector& r_star, const DualResult& dual, FKind f) {
  Vector w(p.size());
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    w[x] = p[x] > 0 ? p[x] * oracle_conjugate_derivative(f, dual.gamma[x] - dual.nu) : 0.0;
  }
  w /= w.sum();
  return (r_star - w).cwiseAbs().sum();
}

PrimalResult proximal_ot(const Vector& q, const Vector& p, const Eigen::MatrixXd& cost, double eps, FKind f,
                         const OracleTolerances& tol) {
  if (!(eps > 0.0)) throw DomainError("proximal_ot: eps must be positive");
  if (cost.rows() != q.size() || cost.cols() != p.size()) throw ShapeMismatch("proximal_ot: cost shape");
  return infimal_convolution(q, p, cost, eps, f, tol);
}

PotDualReport dual_pot_check(const Vector& q, const Vector& p, const Eigen::MatrixXd& cost, double eps,
                             const OracleTolerances& tol) {
  PotDualReport rep;
  rep.primal = proximal_ot(q, p, cost, eps, FKind::KL, tol).value;
  std::vector<int> xs, ys;
  for (Eigen::Index x = 0; x < q.size(); ++x) {
    if (q[x] > 0) xs.push_back(static_cast<int>(x));
  }
  for (Eigen::Index y = 0; y < p.size(); ++y) {
    if (p[y] > 0) ys.push_back(static_cast<int>(y));
  }
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  Vector qs(nx), ps(ny);
  for (int a = 0; a < nx; ++a) qs[a] = q[xs[a]];
  for (int b = 0; b < ny; ++b) ps[b] = p[ys[b]];
  Eigen::MatrixXd c(nx, ny);
  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) c(a, b) = cost(xs[a], ys[b]);
  }

  auto dual_value = [&](const Vector& phi, const Vector& psi) {
    double mx = -HUGE_VAL;
    for (int b = 0; b < ny; ++b) mx = std::max(mx, -psi[b] / eps);
    double s = 0.0;
    for (int b = 0; b < ny; ++b) s += ps[b] * std::exp(-psi[b] / eps - mx);
    return qs.dot(phi) - eps * (mx + std::log(s));
  };
  ConcaveProblem prob;
  prob.dim = nx + ny;
  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) prob.constraints.push_back({{{a, 1.0}, {nx + b, 1.0}}, c(a, b)});
  }
  prob.value = [&](const Vector& z) { return dual_value(z.head(nx), z.tail(ny)); };
  prob.derivatives = [&](const Vector& z, Vector& grad, Eigen::MatrixXd& neg_hess) {
    Vector psi = z.tail(ny);
    double mx = -HUGE_VAL;
    for (int b = 0; b < ny; ++b) mx = std::max(mx, -psi[b] / eps);
    Vector w(ny);
    for (int b = 0; b < ny; ++b) w[b] = ps[b] * std::exp(-psi[b] / eps - mx);
    w /= w.sum();
    grad.resize(nx + ny);
    grad.head(nx) = qs;
    grad.tail(ny) = w;
    neg_hess.setZero(nx + ny, nx + ny);
    neg_hess.bottomRightCorner(ny, ny) = (Eigen::MatrixXd(w.asDiagonal()) - w * w.transpose()) / eps;
  };
  const double delta = 1.0 + std::max(0.0, -c.minCoeff());
  BarrierOptions opts;
  opts.gap_tolerance = tol.barrier_gap;
  auto res = maximize_concave(prob, Vector::Constant(nx + ny, -delta), opts);
  Vector phi = res.z.head(nx), psi = res.z.tail(ny);
  // c-transform polish: both updates keep feasibility and cannot decrease the value.
  for (int b = 0; b < ny; ++b) psi[b] = (c.col(b) - phi).minCoeff();
  for (int a = 0; a < nx; ++a) phi[a] = (c.row(a).transpose() - psi).minCoeff();
  rep.dual = dual_value(phi, psi);
  rep.gap = rep.primal - rep.dual;
  rep.phi = Vector::Zero(q.size());
  rep.psi = Vector::Zero(p.size());
  for (int a = 0; a < nx; ++a) rep.phi[xs[a]] = phi[a];
  for (int b = 0; b < ny; ++b) rep.psi[ys[b]] = psi[b];
  return rep;
}

std::vector<int> family_of(const Dag& dag, int node) {
  std::vector<int> fam = dag.parents(node);
  fam.push_back(node);
  std::sort(fam.begin(), fam.end());
  return fam;
}

Eigen::MatrixXd conditional_kernel(const DiscreteBayesNet& q_net, int node) {
  const Dag& dag = q_net.dag();
  FinitePmf joint = enumerate_joint(q_net);
  const int N = joint.size();
  const auto fam = family_of(dag, node);
  const auto& pa = dag.parents(node);
  const auto& rank = dag.topological_rank();
  std::vector<int> prefix;
  for (int v = 0; v < dag.node_count(); ++v) {
    if (rank[v] < rank[node]) prefix.push_back(v);
  }
  FinitePmf q_prefix = marginalize(joint, prefix);
  FinitePmf q_pa = marginalize(joint, pa);
  FinitePmf q_fam = marginalize(joint, fam);
  auto proj_fam = projection_index(joint, fam);
  auto proj_prefix = projection_index(joint, prefix);
  auto proj_pa = projection_index(joint, pa);
  double free_configs = 1.0;
  for (int v : prefix) {
    if (!std::binary_search(pa.begin(), pa.end(), v)) free_configs *= q_net.cardinalities()[v];
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(q_fam.size(), N);
  for (int x = 0; x < N; ++x) {
    auto codes = joint.point(x);
    const double qp = q_pa[proj_pa[x]];
    double w = qp > 0 ? q_prefix[proj_prefix[x]] / qp : 1.0 / free_configs;
    for (int j = 0; j < dag.node_count() && w != 0.0; ++j) {
      if (rank[j] > rank[node]) w *= q_net.probability(j, codes);
    }
    K(proj_fam[x], x) = w;
  }
  return K;
}

Vector conditional_expectation_operator(const DiscreteBayesNet& q_net, int node, const Vector& gamma) {
  Eigen::MatrixXd K = conditional_kernel(q_net, node);
  if (gamma.size() != K.cols()) throw ShapeMismatch("conditional_expectation_operator: gamma size");
  return K * gamma;
}

Vector lift_family_measure(const DiscreteBayesNet& q_net, int node, const Vector& p_family) {
  Eigen::MatrixXd K = conditional_kernel(q_net, node);
  if (p_family.size() != K.rows()) throw ShapeMismatch("lift_family_measure: family pmf size");
  return K.transpose() * p_family;
}

Eigen::MatrixXd aggregated_cost(const DiscreteBayesNet& q_net, int node, const Eigen::MatrixXd& base_cost) {
  Eigen::MatrixXd K = conditional_kernel(q_net, node);
  if (base_cost.rows() != K.cols() || base_cost.cols() != K.cols()) {
    throw ShapeMismatch("aggregated_cost: base cost must be defined on the full support");
  }
  return K * base_cost * K.transpose();
}

double empirical_w1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ShapeMismatch("empirical_w1_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s / static_cast<double>(a.size());
  }
  // Integral of |F_a - F_b| over the merged breakpoints.
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    while (ia < a.size() && a[ia] <= pts[k]) ++ia;
    while (ib < b.size() && b[ib] <= pts[k]) ++ib;
    const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
    const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
    total += std::abs(fa - fb) * (pts[k + 1] - pts[k]);
  }
  return total;
}

double conditional_independence_residual(const FinitePmf& r, int child, const std::vector<int>& parents,
                                         const std::vector<int>& before) {
  auto with_child = [&](std::vector<int> s) {
    s.push_back(child);
    std::sort(s.begin(), s.end());
    return s;
  };
  auto full_c = with_child(before);
  auto pa_c = with_child(parents);
  FinitePmf m_full_c = marginalize(r, full_c);
  FinitePmf m_full = marginalize(r, before);
  FinitePmf m_pa_c = marginalize(r, pa_c);
  FinitePmf m_pa = marginalize(r, parents);
  auto i_full_c = projection_index(r, full_c);
  auto i_full = projection_index(r, before);
  auto i_pa_c = projection_index(r, pa_c);
  auto i_pa = projection_index(r, parents);
  double worst = 0.0;
  for (int x = 0; x < r.size(); ++x) {
    const double den_full = m_full[i_full[x]];
    const double den_pa = m_pa[i_pa[x]];
    if (den_full <= 1e-12 || den_pa <= 1e-12) continue;
    worst = std::max(worst, std::abs(m_full_c[i_full_c[x]] / den_full - m_pa_c[i_pa_c[x]] / den_pa));
  }
  return worst;
}

}  // namespace gigan
