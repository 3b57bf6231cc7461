#include "gigan/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "gigan/errors.hpp"

namespace gigan {

namespace {

double mean_pairwise(const Matrix& a, const Matrix& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    total += (b.rowwise() - a.row(i)).rowwise().norm().sum();
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

}  // namespace

double energy_distance(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw ShapeMismatch("energy_distance: column counts differ");
  if (x.rows() < 1 || y.rows() < 1) throw ShapeMismatch("energy_distance: empty sample");
  return 2.0 * mean_pairwise(x, y) - mean_pairwise(x, x) - mean_pairwise(y, y);
}

double energy_distance(const SampleBatch& x, const SampleBatch& y) { return energy_distance(x.data, y.data); }

double auc(std::span<const double> real_scores, std::span<const double> fake_scores) {
  if (real_scores.empty() || fake_scores.empty()) throw ShapeMismatch("auc: empty score list");
  std::vector<double> fake(fake_scores.begin(), fake_scores.end());
  std::sort(fake.begin(), fake.end());
  double wins = 0.0;
  for (double r : real_scores) {
    const auto lo = std::lower_bound(fake.begin(), fake.end(), r);
    const auto hi = std::upper_bound(lo, fake.end(), r);
    wins += static_cast<double>(lo - fake.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(real_scores.size()) * static_cast<double>(fake.size()));
}

std::vector<double> node_tv(const SampleBatch& decoded, const DiscreteBayesNet& net) {
  const auto& cards = net.cardinalities();
  if (decoded.cols() != net.node_count()) throw ShapeMismatch("node_tv: one column per node expected");
  if (decoded.rows() < 1) throw ShapeMismatch("node_tv: empty batch");
  const auto truth = exact_marginals(net);
  std::vector<Vector> counts;
  for (int c : cards) counts.push_back(Vector::Zero(c));
  for (int r = 0; r < decoded.rows(); ++r) {
    auto codes = row_codes(decoded, r, cards);
    for (int i = 0; i < net.node_count(); ++i) counts[i][codes[i]] += 1.0;
  }
  std::vector<double> out;
  for (int i = 0; i < net.node_count(); ++i) {
    out.push_back(0.5 * (counts[i] / decoded.rows() - truth[i]).cwiseAbs().sum());
  }
  return out;
}

LoglikSummary avg_loglik_truth(const SampleBatch& decoded, const DiscreteBayesNet& net) {
  LoglikSummary s;
  double total = 0.0;
  int used = 0;
  for (int r = 0; r < decoded.rows(); ++r) {
    const double lp = joint_logprob(net, row_codes(decoded, r, net.cardinalities()));
    if (std::isinf(lp)) {
      ++s.excluded;
    } else {
      total += lp;
      ++used;
    }
  }
  s.mean = used > 0 ? total / used : kLogZero;
  return s;
}

double parent_coeff_error(const SampleBatch& generated, const LinearGaussianNet& truth) {
  const Dag& dag = truth.dag();
  if (generated.cols() != dag.node_count()) throw ShapeMismatch("parent_coeff_error: one column per node expected");
  double total = 0.0;
  int count = 0;
  for (int i = 0; i < dag.node_count(); ++i) {
    const auto& pa = dag.parents(i);
    if (pa.empty()) continue;
    const int k = static_cast<int>(pa.size());
    Eigen::MatrixXd X(generated.rows(), k + 1);
    for (int c = 0; c < k; ++c) X.col(c) = generated.data.col(pa[c]);
    X.col(k).setOnes();
    Eigen::VectorXd y = generated.data.col(i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k + 1) throw SingularDesign("parent design of node " + dag.name(i) + " is rank-deficient");
    Eigen::VectorXd beta = qr.solve(y);
    double err = 0.0;
    for (int c = 0; c < k; ++c) err += std::pow(beta[c] - truth.coeff(pa[c], i), 2);
    total += std::sqrt(err);
    ++count;
  }
  return count > 0 ? total / count : 0.0;
}

BallFit fit_ball_physics(const SampleBatch& trajectories, int m_plus_1) {
  if (m_plus_1 < 3) throw DomainError("fit_ball_physics: at least 3 time points are needed");
  if (trajectories.cols() != m_plus_1) throw ShapeMismatch("fit_ball_physics: column count");
  BallModel model;
  model.m_plus_1 = m_plus_1;
  const auto t = model.times();
  Eigen::MatrixXd A(m_plus_1, 2);
  for (int j = 0; j < m_plus_1; ++j) {
    A(j, 0) = t[j];
    A(j, 1) = -0.5 * t[j] * t[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  BallFit fit;
  const int n = trajectories.rows();
  double g_total = 0.0;
  for (int r = 0; r < n; ++r) {
    Eigen::VectorXd y = trajectories.data.row(r).transpose();
    Eigen::VectorXd beta = qr.solve(y);
    fit.v0_hat.push_back(beta[0]);
    g_total += beta[1];
  }
  if (n > 0) {
    fit.g_hat = g_total / n;
    fit.v0_mean = std::accumulate(fit.v0_hat.begin(), fit.v0_hat.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : fit.v0_hat) ss += (v - fit.v0_mean) * (v - fit.v0_mean);
    fit.v0_std = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  }
  return fit;
}

std::string DiagnosticsReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return format_double(v);
  };
  if (energy_distance) j["energy_distance"] = num(*energy_distance);
  if (!auc.empty()) {
    j["auc"] = nlohmann::json::array();
    for (double v : auc) j["auc"].push_back(num(v));
  }
  if (!tv_per_node.empty()) {
    j["tv_per_node"] = nlohmann::json::array();
    for (double v : tv_per_node) j["tv_per_node"].push_back(num(v));
    j["max_tv"] = num(*std::max_element(tv_per_node.begin(), tv_per_node.end()));
  }
  if (avg_loglik) j["avg_loglik"] = num(*avg_loglik);
  if (excluded_rows) j["excluded_rows"] = *excluded_rows;
  if (coeff_error) j["coeff_error"] = num(*coeff_error);
  if (physics) {
    j["physics"] = {{"g_hat", num(physics->g_hat)},
                    {"v0_mean_hat", num(physics->v0_mean)},
                    {"v0_std_hat", num(physics->v0_std)}};
  }
  return j.dump(2);
}

DiagnosticsReport diagnose(const SampleBatch& generated, const AnyNet& net, const SampleBatch* reference) {
  DiagnosticsReport rep;
  if (const auto* d = std::get_if<DiscreteBayesNet>(&net)) {
    rep.tv_per_node = node_tv(generated, *d);
    auto ll = avg_loglik_truth(generated, *d);
    rep.avg_loglik = ll.mean;
    rep.excluded_rows = ll.excluded;
    if (reference) {
      auto a = dummy_encode(generated, d->cardinalities()).first;
      auto b = dummy_encode(*reference, d->cardinalities()).first;
      rep.energy_distance = energy_distance(a, b);
    }
  } else {
    const auto& g = std::get<LinearGaussianNet>(net);
    rep.coeff_error = parent_coeff_error(generated, g);
    if (reference) rep.energy_distance = energy_distance(generated, *reference);
  }
  return rep;
}

}  // namespace gigan
