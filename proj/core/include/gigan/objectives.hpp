#pragma once

#include <span>
#include <string>
#include <vector>

#include "gigan/bayesnet.hpp"
#include "gigan/graph.hpp"
#include "gigan/nn.hpp"

namespace gigan {

enum class FKind { KL, JS };
enum class ObjectiveForm { DvKl, FganKl, FganJs };

std::string to_string(FKind f);
std::string to_string(ObjectiveForm form);
FKind parse_fkind(const std::string& name);
/// Accepts "dv_kl", "fgan_kl", "fgan_js".
ObjectiveForm parse_objective(const std::string& name);

/// f_KL(t) = t log t; f_JS(t) = (t log t - (t + 1) log((t + 1) / 2)) / 2.
double f_value(FKind f, double t);
/// f'(t) for t > 0.
double f_derivative(FKind f, double t);
/// lim_{t -> inf} f(t) / t: +inf for KL, log(2) / 2 for JS.
double f_recession(FKind f);

/// Conjugates used by the f-GAN objectives: e^{s-1} and -log(2 - e^s) (s < log 2).
double f_star(FKind f, double s);
double f_star_derivative(FKind f, double s);

/// log 2 - softplus(-v) = log(2 sigmoid(v)), strictly increasing onto (-inf, log 2).
double js_domain_activation(double v);
double js_domain_derivative(double v);

double logmeanexp(std::span<const double> values);

struct ObjectiveResult {
  double value = 0.0;
  Vector grad_real;
  Vector grad_fake;
};

/// mean(real) - logmeanexp(fake).
ObjectiveResult dv_kl_objective(std::span<const double> real_scores, std::span<const double> fake_scores);
/// mean(real) - mean(f_star(fake)); scores must already lie in the domain of f_star.
ObjectiveResult fgan_objective(FKind f, std::span<const double> real_scores, std::span<const double> fake_scores);
/// JS f-GAN objective on raw critic outputs v with js_domain_activation fused in:
/// mean(log 2 - softplus(-v_real)) - mean(softplus(v_fake) - log 2).
ObjectiveResult fgan_js_logit_objective(std::span<const double> real_logits, std::span<const double> fake_logits);

/// Dispatch on the form. For FganJs, critics whose output activation is
/// js_domain are evaluated with fgan_objective, otherwise the fused form.
ObjectiveResult evaluate_objective(ObjectiveForm form, OutputActivation critic_output,
                                   std::span<const double> real_scores, std::span<const double> fake_scores);

struct GraphObjectiveResult {
  double value = 0.0;
  std::vector<double> per_family;
  /// Gradient of the weighted objective with respect to each critic's parameters.
  std::vector<std::vector<double>> critic_grads;
  /// Gradient of the weighted objective with respect to the fake batch.
  Matrix fake_grad;
};

struct GraphObjectiveOptions {
  bool critic_grads = true;
  bool fake_grad = true;
};

/// Column sets fed to each critic: the families themselves, or their
/// encoded blocks when `encoding` is given.
std::vector<std::vector<int>> family_columns(const FamilySpec& families, const Encoding* encoding = nullptr);

/// sum_i w_i J_i where J_i evaluates `form` on the columns of family i only.
GraphObjectiveResult graph_informed_objective(ObjectiveForm form, const FamilySpec& families,
                                              const std::vector<std::vector<int>>& columns,
                                              const std::vector<Mlp>& critics, const Matrix& real_batch,
                                              const Matrix& fake_batch, const GraphObjectiveOptions& options = {});

}  // namespace gigan
