#include <algorithm>
#include <cmath>

#include "gigan/errors.hpp"
#include "gigan/oracle.hpp"
#include "gigan/rng.hpp"
#include "oracle_internal.hpp"

namespace gigan {

std::string to_string(ModelClass m) {
  switch (m) {
    case ModelClass::AllPmfs: return "all_pmfs";
    case ModelClass::GraphFactorized: return "graph_factorized";
    case ModelClass::ProductPmfs: return "product_pmfs";
  }
  return "all_pmfs";
}

ModelClass parse_model_class(const std::string& name) {
  if (name == "all_pmfs") return ModelClass::AllPmfs;
  if (name == "graph_factorized") return ModelClass::GraphFactorized;
  if (name == "product_pmfs") return ModelClass::ProductPmfs;
  throw ParseError("unknown model class '" + name + "'");
}

DataProcessingReport certify_data_processing(const DiscreteBayesNet& q_net, int node, const Vector& p_family,
                                             const DivergenceSpec& spec, double tolerance,
                                             const OracleTolerances& tol) {
  FinitePmf q = enumerate_joint(q_net);
  const auto fam = family_of(q_net.dag(), node);
  FinitePmf q_fam = marginalize(q, fam);
  if (p_family.size() != q_fam.size()) throw ShapeMismatch("certify_data_processing: family pmf size");
  Eigen::MatrixXd K = conditional_kernel(q_net, node);
  Vector lifted = K.transpose() * p_family;
  FinitePmf p_lift = q.with_probs(lifted);

  DataProcessingReport rep;
  if (spec.gamma.kind == GammaClass::Kind::AllBounded) {
    rep.lhs = f_divergence(q_fam.probs(), p_family, spec.f);
    rep.rhs = f_divergence(q, p_lift, spec.f);
  } else {
    // sup over gamma in Gamma of E_{Q_F} I[gamma] - Lambda^{P_F}(I[gamma]); E_{Q_F} I[gamma] = E_Q gamma.
    auto param = detail::parameterize(q, spec);
    detail::DualSetup setup;
    setup.a = param.map.transpose() * q.probs();
    setup.B = K * param.map;
    setup.base = p_family;
    setup.f = spec.f;
    setup.constraints = std::move(param.constraints);
    rep.lhs = std::max(0.0, detail::solve_dual(setup, tol).value);
    rep.rhs = f_gamma_dual(q, p_lift, spec, tol).value;
  }
  if (std::isinf(rep.lhs) && std::isinf(rep.rhs)) {
    rep.slack = 0.0;
  } else {
    rep.slack = rep.lhs - rep.rhs;
  }
  rep.holds = rep.slack >= -tolerance;
  return rep;
}

double discrepancy_with_gradient(const FinitePmf& q, const Vector& p, const DivergenceSpec& spec, Discrepancy kind,
                                 Vector* grad) {
  const int n = q.size();
  if (p.size() != n) throw ShapeMismatch("discrepancy_with_gradient: support mismatch");
  const Vector& qv = q.probs();
  if (grad) grad->setZero(n);
  if (kind == Discrepancy::Ipm) {
    switch (spec.gamma.kind) {
      case GammaClass::Kind::AllBounded:
        throw NotApplicable("the IPM over all bounded functions is not a finite discrepancy");
      case GammaClass::Kind::Lipschitz: {
        auto t = solve_transport(qv, p, spec.gamma.bound * detail::metric_for(q, spec).d);
        if (grad) *grad = t.v;
        return t.cost;
      }
      case GammaClass::Kind::SupBounded:
        if (grad) {
          for (int x = 0; x < n; ++x) (*grad)[x] = spec.gamma.bound * (p[x] > qv[x] ? 1.0 : (p[x] < qv[x] ? -1.0 : 0.0));
        }
        return spec.gamma.bound * (qv - p).cwiseAbs().sum();
      case GammaClass::Kind::AdditiveFamilies: {
        double total = 0.0;
        for (const auto& fam : spec.gamma.families.families) {
          auto proj = projection_index(q, fam);
          FinitePmf qf = marginalize(q, fam);
          Vector pf = Vector::Zero(qf.size());
          for (int x = 0; x < n; ++x) pf[proj[x]] += p[x];
          auto t = solve_transport(qf.probs(), pf, spec.gamma.bound * FiniteMetric::l1(qf.cardinalities()).d);
          total += t.cost;
          if (grad) {
            for (int x = 0; x < n; ++x) (*grad)[x] += t.v[proj[x]];
          }
        }
        return total;
      }
    }
  }
  if (spec.gamma.kind == GammaClass::Kind::AllBounded) {
    double total = 0.0;
    for (int x = 0; x < n; ++x) {
      if (p[x] > 0) {
        const double t = qv[x] / p[x];
        total += p[x] * f_value(spec.f, t);
        if (grad) (*grad)[x] = f_value(spec.f, t) - (t > 0 ? t * f_derivative(spec.f, t) : 0.0);
      } else if (qv[x] > 0) {
        if (spec.f == FKind::KL) return HUGE_VAL;
        total += qv[x] * f_recession(spec.f);
        const double t = qv[x] / 1e-300;
        if (grad) (*grad)[x] = f_value(spec.f, t) - t * f_derivative(spec.f, t);
      } else if (grad) {
        (*grad)[x] = f_value(spec.f, 0.0);
      }
    }
    return std::max(0.0, total);
  }
  DualResult d = f_gamma_dual(q, q.with_probs(p), spec);
  if (grad) {
    for (int x = 0; x < n; ++x) {
      const double s = d.gamma[x] - d.nu;
      (*grad)[x] = spec.f == FKind::KL ? -std::exp(s) : -oracle_conjugate(FKind::JS, s);
    }
  }
  return d.value;
}

namespace {

DivergenceSpec family_spec(const DivergenceSpec& spec, const std::vector<int>& family_cards) {
  DivergenceSpec out;
  out.f = spec.f;
  switch (spec.gamma.kind) {
    case GammaClass::Kind::AllBounded:
    case GammaClass::Kind::SupBounded:
      out.gamma = spec.gamma;
      break;
    case GammaClass::Kind::Lipschitz:
      out.gamma = spec.gamma;
      out.metric = FiniteMetric::l1(family_cards);
      break;
    case GammaClass::Kind::AdditiveFamilies:
      throw NotApplicable("family-restricted classes are defined for AllBounded, Lipschitz and SupBounded");
  }
  return out;
}

/// Objective over full-grid pmfs with gradient.
struct Objective {
  virtual ~Objective() = default;
  virtual double eval(const Vector& p, Vector* grad) const = 0;
};

struct GlobalObjective final : Objective {
  const FinitePmf& q;
  const DivergenceSpec& spec;
  Discrepancy kind;
  GlobalObjective(const FinitePmf& q_, const DivergenceSpec& s, Discrepancy k) : q(q_), spec(s), kind(k) {}
  double eval(const Vector& p, Vector* grad) const override { return discrepancy_with_gradient(q, p, spec, kind, grad); }
};

struct LocalObjective final : Objective {
  std::vector<FinitePmf> q_fams;
  std::vector<std::vector<int>> proj;
  std::vector<DivergenceSpec> specs;
  Discrepancy kind;
  int n_full = 0;

  LocalObjective(const DiscreteBayesNet& net, const FinitePmf& q, const DivergenceSpec& spec, Discrepancy k)
      : kind(k), n_full(q.size()) {
    for (int i = 0; i < net.node_count(); ++i) {
      auto fam = family_of(net.dag(), i);
      q_fams.push_back(marginalize(q, fam));
      proj.push_back(projection_index(q, fam));
      specs.push_back(family_spec(spec, q_fams.back().cardinalities()));
    }
  }

  double eval(const Vector& p, Vector* grad) const override {
    const double inv_n = 1.0 / static_cast<double>(q_fams.size());
    double total = 0.0;
    if (grad) grad->setZero(n_full);
    for (std::size_t i = 0; i < q_fams.size(); ++i) {
      Vector pf = Vector::Zero(q_fams[i].size());
      for (int x = 0; x < n_full; ++x) pf[proj[i][x]] += p[x];
      Vector gf;
      const double v = discrepancy_with_gradient(q_fams[i], pf, specs[i], kind, grad ? &gf : nullptr);
      if (std::isinf(v)) return v;
      total += inv_n * v;
      if (grad) {
        for (int x = 0; x < n_full; ++x) (*grad)[x] += inv_n * gf[proj[i][x]];
      }
    }
    return total;
  }
};

/// Softmax-parameterized factorization over a DAG: P_x = prod_j CPT_j(x_j | row_j(x)).
struct Factorization {
  std::vector<int> cards;
  std::vector<int> rows_per_node;
  std::vector<int> offsets;  // start of node j's logits, row-major (row, state)
  std::vector<std::vector<int>> row_of;    // [j][x]
  std::vector<std::vector<int>> state_of;  // [j][x]
  int n_full = 0;
  int dim = 0;

  Factorization(const Dag& dag, const std::vector<int>& cardinalities, const FinitePmf& grid) : cards(cardinalities) {
    n_full = grid.size();
    const int n = dag.node_count();
    row_of.assign(n, std::vector<int>(n_full));
    state_of.assign(n, std::vector<int>(n_full));
    for (int j = 0; j < n; ++j) {
      offsets.push_back(dim);
      int rows = 1;
      for (int pa : dag.parents(j)) rows *= cards[pa];
      rows_per_node.push_back(rows);
      dim += rows * cards[j];
    }
    for (int x = 0; x < n_full; ++x) {
      auto codes = grid.point(x);
      for (int j = 0; j < n; ++j) {
        int r = 0;
        for (int pa : dag.parents(j)) r = r * cards[pa] + codes[pa];
        row_of[j][x] = r;
        state_of[j][x] = codes[j];
      }
    }
  }

  /// Row-wise softmax of the logits.
  [[nodiscard]] Vector cpts(const Vector& theta) const {
    Vector out(dim);
    for (std::size_t j = 0; j < cards.size(); ++j) {
      const int k = cards[j];
      for (int r = 0; r < rows_per_node[j]; ++r) {
        const int o = offsets[j] + r * k;
        const double mx = theta.segment(o, k).maxCoeff();
        double s = 0.0;
        for (int c = 0; c < k; ++c) s += out[o + c] = std::exp(theta[o + c] - mx);
        out.segment(o, k) /= s;
      }
    }
    return out;
  }

  [[nodiscard]] Vector joint(const Vector& cpt) const {
    Vector p(n_full);
    for (int x = 0; x < n_full; ++x) {
      double v = 1.0;
      for (std::size_t j = 0; j < cards.size(); ++j) v *= cpt[offsets[j] + row_of[j][x] * cards[j] + state_of[j][x]];
      p[x] = v;
    }
    return p;
  }

  /// Chain rule from dF/dP to dF/dtheta.
  [[nodiscard]] Vector pullback(const Vector& cpt, const Vector& p, const Vector& g) const {
    Vector out = Vector::Zero(dim);
    Vector row_mass = Vector::Zero(dim);
    for (int x = 0; x < n_full; ++x) {
      const double w = g[x] * p[x];
      for (std::size_t j = 0; j < cards.size(); ++j) {
        const int base = offsets[j] + row_of[j][x] * cards[j];
        out[base + state_of[j][x]] += w;
        row_mass[base] += w;
      }
    }
    for (std::size_t j = 0; j < cards.size(); ++j) {
      const int k = cards[j];
      for (int r = 0; r < rows_per_node[j]; ++r) {
        const int base = offsets[j] + r * k;
        for (int c = 0; c < k; ++c) out[base + c] -= cpt[base + c] * row_mass[base];
      }
    }
    return out;
  }
};

/// A descent stops when kStallWindow steps gain less than kStallRatio relative.
constexpr int kStallWindow = 25;
constexpr double kStallRatio = 1e-3;

struct Minimum {
  double value = HUGE_VAL;
  int evaluations = 0;
};

/// Exponentiated gradient on the simplex with Polyak steps (the infimum is 0).
Minimum minimize_simplex(const Objective& obj, Vector p, const InfimalOptions& opt) {
  Minimum m;
  Vector g;
  double v = obj.eval(p, &g);
  ++m.evaluations;
  double kappa = 1.0;
  double checkpoint = v;
  for (int step = 0; step < opt.max_steps && v > opt.target; ++step) {
    if (step > 0 && step % kStallWindow == 0) {
      if (v > (1.0 - kStallRatio) * checkpoint) break;
      checkpoint = v;
    }
    for (Eigen::Index x = 0; x < g.size(); ++x) {
      if (!std::isfinite(g[x])) g[x] = 0.0;
    }
    const double mid = 0.5 * (g.maxCoeff() + g.minCoeff());
    Vector gc = g.array() - mid;
    const double norm = gc.cwiseAbs().maxCoeff();
    if (norm <= 0.0) break;
    const double eta = kappa * v / (norm * norm);
    Vector next = p.array() * (-eta * gc.array()).exp();
    next /= next.sum();
    Vector g_next;
    const double v_next = obj.eval(next, &g_next);
    ++m.evaluations;
    if (v_next < v) {
      p = std::move(next);
      g = std::move(g_next);
      v = v_next;
      kappa = std::min(2.0, kappa * 1.5);
    } else {
      kappa *= 0.5;
      if (kappa < 1e-8) break;
    }
  }
  m.value = v;
  return m;
}

/// Polyak gradient descent on CPT logits.
Minimum minimize_factorized(const Objective& obj, const Factorization& fac, Vector theta, const InfimalOptions& opt) {
  Minimum m;
  Vector cpt = fac.cpts(theta);
  Vector p = fac.joint(cpt);
  Vector g;
  double v = obj.eval(p, &g);
  ++m.evaluations;
  double kappa = 1.0;
  double checkpoint = v;
  for (int step = 0; step < opt.max_steps && v > opt.target; ++step) {
    if (step > 0 && step % kStallWindow == 0) {
      if (v > (1.0 - kStallRatio) * checkpoint) break;
      checkpoint = v;
    }
    for (Eigen::Index x = 0; x < g.size(); ++x) {
      if (!std::isfinite(g[x])) g[x] = 0.0;
    }
    Vector gt = fac.pullback(cpt, p, g);
    const double norm2 = gt.squaredNorm();
    if (norm2 <= 0.0) break;
    Vector next = theta - (kappa * v / norm2) * gt;
    Vector cpt_next = fac.cpts(next);
    Vector p_next = fac.joint(cpt_next);
    Vector g_next;
    const double v_next = obj.eval(p_next, &g_next);
    ++m.evaluations;
    if (v_next < v) {
      theta = std::move(next);
      cpt = std::move(cpt_next);
      p = std::move(p_next);
      g = std::move(g_next);
      v = v_next;
      kappa = std::min(2.0, kappa * 1.5);
    } else {
      kappa *= 0.5;
      if (kappa < 1e-8) break;
    }
  }
  m.value = v;
  return m;
}

/// Logits reproducing Q's own factorization (GraphFactorized) or the product
/// of its marginals (ProductPmfs).
Vector endpoint_logits(const Factorization& fac, const DiscreteBayesNet& net, const FinitePmf& q, bool factorized) {
  Vector theta = Vector::Constant(fac.dim, std::log(1e-300));
  for (int x = 0; x < fac.n_full; ++x) {
    auto codes = q.point(x);
    for (std::size_t j = 0; j < fac.cards.size(); ++j) {
      const int idx = fac.offsets[j] + fac.row_of[j][x] * fac.cards[j] + fac.state_of[j][x];
      if (factorized) theta[idx] = std::log(std::max(net.probability(static_cast<int>(j), codes), 1e-300));
    }
  }
  if (!factorized) {
    for (std::size_t j = 0; j < fac.cards.size(); ++j) {
      FinitePmf m = marginalize(q, std::vector<int>{static_cast<int>(j)});
      for (int c = 0; c < fac.cards[j]; ++c) theta[fac.offsets[j] + c] = std::log(std::max(m.probs()[c], 1e-300));
    }
  }
  return theta;
}

/// Start 0 is uniform, start 1 the endpoint built from Q, the rest random.
/// Starts stop once one reaches the lower bound 0 within `target`.
Minimum minimize_over_class(const Objective& obj, const DiscreteBayesNet& net, const FinitePmf& grid,
                            ModelClass model_class, const InfimalOptions& opt, std::uint64_t stream) {
  Minimum best;
  Rng rng(opt.seed, stream);
  const int starts = std::max(2, opt.starts);
  if (model_class == ModelClass::AllPmfs) {
    for (int s = 0; s < starts && best.value > opt.target; ++s) {
      Vector p(grid.size());
      if (s == 1) {
        p = grid.probs();
      } else {
        for (int x = 0; x < grid.size(); ++x) p[x] = s == 0 ? 1.0 : rng.gamma(1.0) + 1e-12;
      }
      p /= p.sum();
      auto m = minimize_simplex(obj, p, opt);
      best.evaluations += m.evaluations;
      best.value = std::min(best.value, m.value);
    }
    return best;
  }
  const bool factorized = model_class == ModelClass::GraphFactorized;
  const Dag dag = factorized ? net.dag() : Dag(net.node_count(), {});
  Factorization fac(dag, net.cardinalities(), grid);
  for (int s = 0; s < starts && best.value > opt.target; ++s) {
    Vector theta(fac.dim);
    if (s == 1) {
      theta = endpoint_logits(fac, net, grid, factorized);
    } else {
      for (int k = 0; k < fac.dim; ++k) theta[k] = s == 0 ? 0.0 : rng.normal();
    }
    auto m = minimize_factorized(obj, fac, theta, opt);
    best.evaluations += m.evaluations;
    best.value = std::min(best.value, m.value);
  }
  return best;
}

}  // namespace

InfimalReport certify_infimal_subadditivity(const DiscreteBayesNet& q_net, const DivergenceSpec& spec,
                                            ModelClass model_class, const InfimalOptions& options) {
  FinitePmf q = enumerate_joint(q_net);
  GlobalObjective global(q, spec, options.discrepancy);
  LocalObjective local(q_net, q, spec, options.discrepancy);
  auto g = minimize_over_class(global, q_net, q, model_class, options, 0x676c6f62);
  auto l = minimize_over_class(local, q_net, q, model_class, options, 0x6c6f6361);
  InfimalReport rep;
  rep.inf_global = std::max(0.0, g.value);
  rep.inf_local_average = std::max(0.0, l.value);
  rep.evaluations = g.evaluations + l.evaluations;
  rep.holds = rep.inf_global <= rep.inf_local_average + options.tolerance;
  rep.asserted = model_class != ModelClass::ProductPmfs;
  return rep;
}

LowerBoundReport certify_lower_bound(const DiscreteBayesNet& q_net, const DiscreteBayesNet& p_net,
                                     const DivergenceSpec& spec, double tolerance) {
  if (q_net.dag().edges() != p_net.dag().edges() || q_net.cardinalities() != p_net.cardinalities()) {
    throw ShapeMismatch("certify_lower_bound: networks must share structure and cardinalities");
  }
  FinitePmf q = enumerate_joint(q_net);
  FinitePmf p = enumerate_joint(p_net);
  LowerBoundReport rep;
  rep.global = f_gamma_dual(q, p, spec).value;
  double total = 0.0;
  const int n = q_net.node_count();
  for (int i = 0; i < n; ++i) {
    auto fam = family_of(q_net.dag(), i);
    FinitePmf qf = marginalize(q, fam);
    FinitePmf pf = marginalize(p, fam);
    total += f_gamma_dual(qf, pf, family_spec(spec, qf.cardinalities())).value;
  }
  rep.local_average = total / n;
  rep.holds = rep.local_average <= rep.global + tolerance;
  return rep;
}

}  // namespace gigan
