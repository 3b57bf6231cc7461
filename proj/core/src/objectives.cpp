#include "gigan/objectives.hpp"

#include <cmath>
#include <numbers>

#include "gigan/errors.hpp"

namespace gigan {

namespace {

constexpr double kLog2 = std::numbers::ln2;

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double xlogx(double t) { return t > 0 ? t * std::log(t) : 0.0; }

}  // namespace

std::string to_string(FKind f) { return f == FKind::KL ? "kl" : "js"; }

std::string to_string(ObjectiveForm form) {
  switch (form) {
    case ObjectiveForm::DvKl: return "dv_kl";
    case ObjectiveForm::FganKl: return "fgan_kl";
    case ObjectiveForm::FganJs: return "fgan_js";
  }
  return "dv_kl";
}

FKind parse_fkind(const std::string& name) {
  if (name == "kl" || name == "KL") return FKind::KL;
  if (name == "js" || name == "JS") return FKind::JS;
  throw ParseError("unknown f '" + name + "'");
}

ObjectiveForm parse_objective(const std::string& name) {
  if (name == "dv_kl") return ObjectiveForm::DvKl;
  if (name == "fgan_kl") return ObjectiveForm::FganKl;
  if (name == "fgan_js") return ObjectiveForm::FganJs;
  throw ParseError("unknown objective '" + name + "'");
}

double f_value(FKind f, double t) {
  if (t < 0) throw DomainError("f_value: negative argument");
  if (f == FKind::KL) return xlogx(t);
  return 0.5 * (xlogx(t) - (t + 1.0) * std::log((t + 1.0) / 2.0));
}

double f_derivative(FKind f, double t) {
  if (f == FKind::KL) return std::log(t) + 1.0;
  return 0.5 * std::log(2.0 * t / (t + 1.0));
}

double f_recession(FKind f) { return f == FKind::KL ? HUGE_VAL : 0.5 * kLog2; }

double f_star(FKind f, double s) {
  if (f == FKind::KL) return std::exp(s - 1.0);
  if (!(s < kLog2 - 1e-12)) throw DomainError("f_star(JS): argument outside (-inf, log 2)");
  return -std::log(2.0 - std::exp(s));
}

double f_star_derivative(FKind f, double s) {
  if (f == FKind::KL) return std::exp(s - 1.0);
  if (!(s < kLog2 - 1e-12)) throw DomainError("f_star(JS): argument outside (-inf, log 2)");
  const double e = std::exp(s);
  return e / (2.0 - e);
}

double js_domain_activation(double v) { return kLog2 - softplus(-v); }
double js_domain_derivative(double v) { return sigmoid(-v); }

double logmeanexp(std::span<const double> values) {
  if (values.empty()) throw ShapeMismatch("logmeanexp: empty input");
  double mx = -HUGE_VAL;
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : values) s += std::exp(v - mx);
  return mx + std::log(s / static_cast<double>(values.size()));
}

ObjectiveResult dv_kl_objective(std::span<const double> real, std::span<const double> fake) {
  if (real.empty() || fake.empty()) throw ShapeMismatch("dv_kl_objective: empty scores");
  ObjectiveResult r;
  const double nr = static_cast<double>(real.size());
  double mean = 0.0;
  for (double v : real) mean += v;
  mean /= nr;
  const double lme = logmeanexp(fake);
  r.value = mean - lme;
  r.grad_real = Vector::Constant(static_cast<Eigen::Index>(real.size()), 1.0 / nr);
  r.grad_fake.resize(static_cast<Eigen::Index>(fake.size()));
  const double nf = static_cast<double>(fake.size());
  for (std::size_t k = 0; k < fake.size(); ++k) r.grad_fake[static_cast<Eigen::Index>(k)] = -std::exp(fake[k] - lme) / nf;
  return r;
}

ObjectiveResult fgan_objective(FKind f, std::span<const double> real, std::span<const double> fake) {
  if (real.empty() || fake.empty()) throw ShapeMismatch("fgan_objective: empty scores");
  ObjectiveResult r;
  const double nr = static_cast<double>(real.size());
  const double nf = static_cast<double>(fake.size());
  double mean_real = 0.0;
  for (double v : real) mean_real += v;
  double mean_star = 0.0;
  r.grad_fake.resize(static_cast<Eigen::Index>(fake.size()));
  for (std::size_t k = 0; k < fake.size(); ++k) {
    mean_star += f_star(f, fake[k]);
    r.grad_fake[static_cast<Eigen::Index>(k)] = -f_star_derivative(f, fake[k]) / nf;
  }
  r.value = mean_real / nr - mean_star / nf;
  r.grad_real = Vector::Constant(static_cast<Eigen::Index>(real.size()), 1.0 / nr);
  return r;
}

ObjectiveResult fgan_js_logit_objective(std::span<const double> real, std::span<const double> fake) {
  if (real.empty() || fake.empty()) throw ShapeMismatch("fgan_js_logit_objective: empty scores");
  ObjectiveResult r;
  const double nr = static_cast<double>(real.size());
  const double nf = static_cast<double>(fake.size());
  r.grad_real.resize(static_cast<Eigen::Index>(real.size()));
  r.grad_fake.resize(static_cast<Eigen::Index>(fake.size()));
  double a = 0.0;
  for (std::size_t k = 0; k < real.size(); ++k) {
    a += kLog2 - softplus(-real[k]);
    r.grad_real[static_cast<Eigen::Index>(k)] = sigmoid(-real[k]) / nr;
  }
  double b = 0.0;
  for (std::size_t k = 0; k < fake.size(); ++k) {
    b += softplus(fake[k]) - kLog2;
    r.grad_fake[static_cast<Eigen::Index>(k)] = -sigmoid(fake[k]) / nf;
  }
  r.value = a / nr - b / nf;
  return r;
}

ObjectiveResult evaluate_objective(ObjectiveForm form, OutputActivation critic_output,
                                   std::span<const double> real, std::span<const double> fake) {
  switch (form) {
    case ObjectiveForm::DvKl: return dv_kl_objective(real, fake);
    case ObjectiveForm::FganKl: return fgan_objective(FKind::KL, real, fake);
    case ObjectiveForm::FganJs:
      return critic_output == OutputActivation::JsDomain ? fgan_objective(FKind::JS, real, fake)
                                                         : fgan_js_logit_objective(real, fake);
  }
  throw DomainError("evaluate_objective: unknown form");
}

std::vector<std::vector<int>> family_columns(const FamilySpec& families, const Encoding* encoding) {
  std::vector<std::vector<int>> cols;
  for (const auto& fam : families.families) cols.push_back(encoding ? encoding->columns(fam) : fam);
  return cols;
}

GraphObjectiveResult graph_informed_objective(ObjectiveForm form, const FamilySpec& families,
                                              const std::vector<std::vector<int>>& columns,
                                              const std::vector<Mlp>& critics, const Matrix& real_batch,
                                              const Matrix& fake_batch, const GraphObjectiveOptions& options) {
  const std::size_t n = families.size();
  if (critics.size() != n || columns.size() != n) {
    throw ShapeMismatch("graph_informed_objective: critic/family count mismatch");
  }
  if (real_batch.cols() != fake_batch.cols()) throw ShapeMismatch("graph_informed_objective: batch widths differ");
  GraphObjectiveResult res;
  res.per_family.resize(n);
  if (options.critic_grads) res.critic_grads.resize(n);
  if (options.fake_grad) res.fake_grad = Matrix::Zero(fake_batch.rows(), fake_batch.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const Mlp& critic = critics[i];
    if (critic.spec().input_dim != static_cast<int>(columns[i].size()) || critic.spec().output_dim != 1) {
      throw ShapeMismatch("graph_informed_objective: critic " + std::to_string(i) + " expects " +
                          std::to_string(critic.spec().input_dim) + " inputs, family has " +
                          std::to_string(columns[i].size()));
    }
    ForwardCache real_cache, fake_cache;
    Matrix xr = slice_columns(real_batch, columns[i]);
    Matrix xf = slice_columns(fake_batch, columns[i]);
    Matrix sr = critic.forward(xr, &real_cache);
    Matrix sf = critic.forward(xf, &fake_cache);
    ObjectiveResult obj = evaluate_objective(form, critic.spec().output_activation,
                                             std::span<const double>(sr.data(), static_cast<std::size_t>(sr.size())),
                                             std::span<const double>(sf.data(), static_cast<std::size_t>(sf.size())));
    if (!std::isfinite(obj.value)) {
      throw NonFiniteObjective("graph_informed_objective: family " + std::to_string(i) + " objective is not finite");
    }
    const double w = families.weights[i];
    res.per_family[i] = obj.value;
    res.value += w * obj.value;
    Matrix gr = w * Matrix(obj.grad_real);
    Matrix gf = w * Matrix(obj.grad_fake);
    std::span<double> pg;
    if (options.critic_grads) {
      res.critic_grads[i].assign(critic.parameter_count(), 0.0);
      pg = res.critic_grads[i];
      critic.backward(real_cache, gr, pg);
    }
    if (options.critic_grads || options.fake_grad) {
      Matrix dx = critic.backward(fake_cache, gf, pg);
      if (options.fake_grad) {
        for (std::size_t c = 0; c < columns[i].size(); ++c) {
          res.fake_grad.col(columns[i][c]) += dx.col(static_cast<Eigen::Index>(c));
        }
      }
    }
  }
  return res;
}

}  // namespace gigan
