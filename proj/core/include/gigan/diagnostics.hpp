#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gigan/bayesnet.hpp"
#include "gigan/io.hpp"

namespace gigan {

/// 2 E|x - y| - E|x - x'| - E|y - y'| with Euclidean norms, V-statistic
/// (within-sample means include the i = j zero terms).
double energy_distance(const Matrix& x, const Matrix& y);
double energy_distance(const SampleBatch& x, const SampleBatch& y);

/// Mann-Whitney: fraction of (real, fake) pairs with real > fake, ties 1/2.
double auc(std::span<const double> real_scores, std::span<const double> fake_scores);

/// Per node, (1/2) sum_k |phat_k - p_k| against the exact marginals.
std::vector<double> node_tv(const SampleBatch& decoded, const DiscreteBayesNet& net);

struct LoglikSummary {
  double mean = 0.0;  // over rows with finite log-probability
  int excluded = 0;   // rows with probability 0 under the net
};

LoglikSummary avg_loglik_truth(const SampleBatch& decoded, const DiscreteBayesNet& net);

/// Mean over non-root nodes of |phi_hat_i - phi_i|_2, phi_hat_i from OLS of
/// column i on its true parents plus an intercept (the intercept is ignored).
double parent_coeff_error(const SampleBatch& generated, const LinearGaussianNet& truth);

struct BallFit {
  double g_hat = 0.0;  // mean of the per-row estimates
  std::vector<double> v0_hat;
  double v0_mean = 0.0;
  double v0_std = 0.0;  // sample standard deviation
};

/// Per row, least squares of y(t_j) on [t_j, -t_j^2 / 2] with t_j = j / m.
BallFit fit_ball_physics(const SampleBatch& trajectories, int m_plus_1);

struct DiagnosticsReport {
  std::optional<double> energy_distance;
  std::vector<double> auc;
  std::vector<double> tv_per_node;
  std::optional<double> avg_loglik;
  std::optional<int> excluded_rows;
  std::optional<double> coeff_error;
  std::optional<BallFit> physics;

  [[nodiscard]] std::string to_json() const;
};

/// Metrics of a generated batch against a reference network: energy
/// distance to `reference` (encoded for categorical nets) when given, node
/// TV and log-likelihood for categorical nets, coefficient error for
/// linear-Gaussian nets.
DiagnosticsReport diagnose(const SampleBatch& generated, const AnyNet& net, const SampleBatch* reference = nullptr);

}  // namespace gigan
