// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gigan/bayesnet.hpp"
#include "gigan/diagnostics.hpp"
#include "gigan/experiments.hpp"
#include "gigan/io.hpp"
#include "gigan/networks.hpp"
#include "gigan/nn.hpp"
#include "gigan/objectives.hpp"
#include "gigan/oracle.hpp"
#include "gigan/training.hpp"
#include "gigan/transport.hpp"
#include "support.hpp"

using namespace gigan;
namespace fs = std::filesystem;
using gigan::testing::dirichlet;
using gigan::testing::normal_matrix;
using gigan::testing::relative_error;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1: gradient suite ----------------------------------------------------

/// Relative error of backward against central differences on up to
/// `max_coords` parameter coordinates and on every input coordinate.
double mlp_gradient_error(const Mlp& net, std::uint64_t seed, std::size_t max_coords = 300) {
  Rng rng(seed, 1);
  const Matrix x = gigan::testing::smooth_inputs(net, 4, rng);
  const Matrix w = normal_matrix(4, net.spec().output_dim, rng);
  ForwardCache cache;
  net.forward(x, &cache);
  std::vector<double> grad(net.parameter_count(), 0.0);
  const Matrix dx = net.backward(cache, w, grad);

  std::vector<std::size_t> coords(net.parameter_count());
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = k;
  if (coords.size() > max_coords) {
    rng.shuffle(std::span<std::size_t>(coords));
    coords.resize(max_coords);
  }
  Mlp probe = net;
  const double h = 1e-6;
  std::vector<double> analytic, numeric;
  for (std::size_t k : coords) {
    const double keep = probe.params()[k];
    probe.params()[k] = keep + h;
    const double up = (probe.forward(x).array() * w.array()).sum();
    probe.params()[k] = keep - h;
    const double down = (probe.forward(x).array() * w.array()).sum();
    probe.params()[k] = keep;
    analytic.push_back(grad[k]);
    numeric.push_back((up - down) / (2 * h));
  }
  double worst = relative_error(analytic, numeric);

  std::vector<double> ain, nin;
  Matrix xp = x;
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      xp(r, c) = x(r, c) + h;
      const double up = (net.forward(xp).array() * w.array()).sum();
      xp(r, c) = x(r, c) - h;
      const double down = (net.forward(xp).array() * w.array()).sum();
      xp(r, c) = x(r, c);
      ain.push_back(dx(r, c));
      nin.push_back((up - down) / (2 * h));
    }
  }
  return std::max(worst, relative_error(ain, nin));
}

Outcome gradient_suite() {
  struct Case {
    const char* tag;
    Dag dag;
    std::vector<int> cards;
  };
  const std::vector<Case> cases = {
      {"hasse", hasse_dag(3), {}},
      {"ball", ball_dag(15), {}},
      {"child", child_dag(), child_cardinalities()},
      {"earthquake", earthquake_dag(), earthquake_cardinalities()},
  };
  double worst = 0.0;
  int networks = 0;
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    CaseStudy cs;
    cs.tag = c.tag;
    for (auto& v : case_variants(cs, 1)) {
      if (!c.cards.empty()) v.config.cardinalities = c.cards;
      const GanState s = init_state(v.config, c.dag, c.dag.node_count());
      worst = std::max(worst, mlp_gradient_error(s.generator, seed++));
      ++networks;
      for (const auto& critic : s.critics) {
        worst = std::max(worst, mlp_gradient_error(critic, seed++));
        ++networks;
      }
    }
  }

  // Gumbel-softmax with frozen noise.
  const Encoding blocks = Encoding::from_cardinalities(earthquake_cardinalities());
  Rng rng(77);
  const Matrix logits = normal_matrix(3, blocks.total_dim, rng);
  const Matrix noise = gumbel_noise(3, blocks.total_dim, rng);
  const Matrix w = normal_matrix(3, blocks.total_dim, rng);
  const Matrix g = gumbel_softmax_backward(gumbel_softmax_frozen(logits, noise, blocks, 0.5), w, blocks, 0.5);
  std::vector<double> ga, gn;
  Matrix lp = logits;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < blocks.total_dim; ++c) {
      const double h = 1e-6;
      lp(r, c) = logits(r, c) + h;
      const double up = (gumbel_softmax_frozen(lp, noise, blocks, 0.5).array() * w.array()).sum();
      lp(r, c) = logits(r, c) - h;
      const double down = (gumbel_softmax_frozen(lp, noise, blocks, 0.5).array() * w.array()).sum();
      lp(r, c) = logits(r, c);
      ga.push_back(g(r, c));
      gn.push_back((up - down) / (2 * h));
    }
  }
  const double gumbel = relative_error(ga, gn);
  std::vector<double> ja, jn;
  for (double v : {-4.0, -1.0, 0.0, 0.5, 3.0}) {
    ja.push_back(js_domain_derivative(v));
    jn.push_back((js_domain_activation(v + 1e-6) - js_domain_activation(v - 1e-6)) / 2e-6);
  }
  const double js = relative_error(ja, jn);
  const double all = std::max({worst, gumbel, js});
  return {all < 1e-5, fmt("%d networks, max rel err %.2e (gumbel %.2e, js_domain %.2e)", networks, worst, gumbel, js)};
}

// ---- oracle sweeps ----------------------------------------------------------

Outcome sweep(const std::string& check, int trials, std::uint64_t seed) {
  const auto t = run_oracle_check(check, trials, seed);
  return {t.failures == 0, fmt("%d/%d instances hold", t.trials - t.failures, t.trials)};
}

Outcome kl_chain_identity() {
  double worst = 0.0;
  const int trials = 1000;
  for (int k = 0; k < trials; ++k) {
    Rng rng(404, static_cast<std::uint64_t>(k));
    const std::vector<int> cards = {2 + static_cast<int>(rng.index(2)), 2 + static_cast<int>(rng.index(2)),
                                    2 + static_cast<int>(rng.index(2))};
    const Dag chain(3, {{0, 1}, {1, 2}});
    const FinitePmf q = enumerate_joint(random_cpts(chain, cards, 1.0, rng.next_u64()));
    const FinitePmf p = enumerate_joint(random_cpts(chain, cards, 1.0, rng.next_u64()));
    auto kl = [&](std::vector<int> keep) {
      return f_divergence(marginalize(q, keep), marginalize(p, keep), FKind::KL);
    };
    const double lhs = f_divergence(q, p, FKind::KL);
    worst = std::max(worst, std::abs(lhs - (kl({0, 1}) + kl({1, 2}) - kl({1}))));
  }
  return {worst < 1e-10, fmt("%d chains, max deviation %.2e", trials, worst)};
}

Outcome infimal() {
  const auto t = run_oracle_check("infimal", 300, 11);
  int asserted = 0, ok = 0;
  double widest = 0.0;
  for (const auto& row : t.rows) {
    if (row.back().rfind("reported", 0) == 0) continue;
    ++asserted;
    const double g = std::stod(row[4]), l = std::stod(row[5]);
    widest = std::max(widest, std::abs(g - l));
    if (row.back() == "holds" && std::abs(g - l) < 1e-3) ++ok;
  }
  return {ok == asserted && asserted > 0,
          fmt("%d/%d asserted instances at zero with |gap| %.2e", ok, asserted, widest)};
}

Outcome proximal_ot_checks() {
  const auto t = run_oracle_check("pot", 500, 13);
  // aggregated_cost against nested enumeration on random chains.
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Rng rng(808, static_cast<std::uint64_t>(k));
    const std::vector<int> cards = {2 + static_cast<int>(rng.index(2)), 2, 2 + static_cast<int>(rng.index(2))};
    const auto net = random_cpts(Dag(3, {{0, 1}, {1, 2}}), cards, 1.0, rng.next_u64());
    const FinitePmf joint = enumerate_joint(net);
    Eigen::MatrixXd base(joint.size(), joint.size());
    for (int x = 0; x < joint.size(); ++x) {
      for (int y = 0; y < joint.size(); ++y) base(x, y) = x == y ? 0.0 : 0.5 + rng.uniform();
    }
    base = (base + base.transpose()).eval() / 2.0;
    for (int node = 0; node < 3; ++node) {
      const auto fam = family_of(net.dag(), node);
      const FinitePmf qf = marginalize(joint, fam);
      const auto proj = projection_index(joint, fam);
      const Eigen::MatrixXd ci = aggregated_cost(net, node, base);
      for (int u = 0; u < qf.size(); ++u) {
        for (int v = 0; v < qf.size(); ++v) {
          double s = 0.0;
          for (int x = 0; x < joint.size(); ++x) {
            if (proj[x] != u) continue;
            for (int y = 0; y < joint.size(); ++y) {
              if (proj[y] != v) continue;
              s += joint[x] / qf[u] * base(x, y) * joint[y] / qf[v];
            }
          }
          worst = std::max(worst, std::abs(ci(u, v) - s));
        }
      }
    }
  }
  return {t.failures == 0 && worst < 1e-12,
          fmt("%d/%d bound+gap instances hold, aggregated cost max deviation %.2e", t.trials - t.failures, t.trials,
              worst)};
}

// ---- 9: W1-Lipschitz kernels --------------------------------------------------

Outcome kernel_lipschitz() {
  const auto net = hasse_gaussian_net(3, 2024);
  std::vector<int> nonroots;
  for (int i = 0; i < net.node_count(); ++i) {
    if (!net.dag().is_root(i)) nonroots.push_back(i);
  }
  Rng rng(99);
  const int n = 2000;
  int ok = 0;
  double worst_ratio = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const int i = nonroots[rng.index(nonroots.size())];
    const auto& pa = net.dag().parents(i);
    double c = 0.0, mean_u = 0.0, mean_v = 0.0, dist = 0.0;
    for (int p : pa) {
      const double u = rng.normal(), v = rng.normal();
      c += std::abs(net.coeff(p, i));
      mean_u += net.coeff(p, i) * u;
      mean_v += net.coeff(p, i) * v;
      dist += std::abs(u - v);
    }
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = mean_u + net.noise_std()[i] * rng.normal();
    for (auto& x : b) x = mean_v + net.noise_std()[i] * rng.normal();
    auto var = [](const std::vector<double>& s) {
      double m = 0.0, q = 0.0;
      for (double x : s) m += x;
      m /= s.size();
      for (double x : s) q += (x - m) * (x - m);
      return q / (s.size() - 1);
    };
    const double se = std::sqrt(var(a) / n + var(b) / n);
    const double w1 = empirical_w1_1d(a, b);
    if (w1 <= c * dist + 3.0 * se) ++ok;
    worst_ratio = std::max(worst_ratio, (w1 - 3.0 * se) / (c * dist));
  }
  return {ok == 100, fmt("%d/100 pairs within C|u-u'|_1 + 3 SE (max (W1 - 3SE) / bound %.3f)", ok, worst_ratio)};
}

// ---- 10: diagnostics oracles ------------------------------------------------

Outcome diagnostics_oracles() {
  Rng rng(5);
  const Matrix x = normal_matrix(50, 3, rng), y = normal_matrix(50, 3, rng, 1.3);
  auto mean_dist = [](const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < b.rows(); ++j) s += (a.row(i) - b.row(j)).norm();
    }
    return s / (static_cast<double>(a.rows()) * b.rows());
  };
  const double e_err = std::abs(energy_distance(x, y) - (2 * mean_dist(x, y) - mean_dist(x, x) - mean_dist(y, y)));

  std::vector<double> r(60), f(45);
  for (auto& v : r) v = std::round(3 * rng.normal()) / 3;
  for (auto& v : f) v = std::round(3 * rng.normal()) / 3;
  double pairs = 0.0;
  for (double a : r) {
    for (double b : f) pairs += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  const double a_err = std::abs(auc(r, f) - pairs / (r.size() * f.size()));

  const auto net = random_cpts(Dag(3, {{0, 1}, {0, 2}}), {2, 3, 2}, 1.0, 6);
  const auto sample = ancestral_sample(net, 300, 7);
  const auto tv = node_tv(sample, net);
  const FinitePmf joint = enumerate_joint(net);
  double tv_err = 0.0;
  for (int v = 0; v < 3; ++v) {
    const FinitePmf m = marginalize(joint, std::vector<int>{v});
    Vector freq = Vector::Zero(m.size());
    for (int row = 0; row < sample.rows(); ++row) freq[static_cast<int>(sample.data(row, v))] += 1.0 / sample.rows();
    tv_err = std::max(tv_err, std::abs(tv[v] - 0.5 * (freq - m.probs()).cwiseAbs().sum()));
  }

  BallModel model;
  const auto t = model.times();
  SampleBatch traj;
  traj.data.resize(3, model.m_plus_1);
  const double v0s[] = {4.0, -1.5, 10.0};
  for (int row = 0; row < 3; ++row) {
    for (int j = 0; j < model.m_plus_1; ++j) traj.data(row, j) = v0s[row] * t[j] - 9.8 * t[j] * t[j] / 2.0;
  }
  for (int j = 0; j < model.m_plus_1; ++j) traj.column_schema.push_back(j);
  const auto fit = fit_ball_physics(traj, model.m_plus_1);
  double b_err = std::abs(fit.g_hat - 9.8);
  for (int row = 0; row < 3; ++row) b_err = std::max(b_err, std::abs(fit.v0_hat[row] - v0s[row]));

  const bool pass = e_err < 1e-10 && a_err < 1e-12 && tv_err < 1e-12 && b_err < 1e-9;
  return {pass, fmt("energy %.1e, auc %.1e, tv %.1e, ball fit %.1e", e_err, a_err, tv_err, b_err)};
}

// ---- 11-13: desk-scale runs ---------------------------------------------------

std::map<std::uint64_t, double> by_seed(const CaseSummary& s, const std::string& variant, const std::string& metric) {
  std::map<std::uint64_t, double> out;
  for (const auto& r : s.runs) {
    if (r.variant != variant) continue;
    auto it = r.metrics.find(metric);
    out[r.seed] = it == r.metrics.end() ? std::nan("") : it->second;
  }
  return out;
}

Outcome hasse_directional(const fs::path& work) {
  CaseStudy cs;
  cs.tag = "hasse";
  cs.run_count = 5;
  cs.base_seed = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = run_case(cs, work);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto gi = by_seed(s, "graph_informed", "coeff_error");
  const auto mis = by_seed(s, "misaligned", "coeff_error");
  int wins = 0;
  std::vector<double> a, b;
  for (const auto& [seed, v] : gi) {
    a.push_back(v);
    b.push_back(mis.at(seed));
    if (v < mis.at(seed)) ++wins;
  }
  int aborted = 0;
  for (const auto& r : s.runs) aborted += r.aborted;
  const double ma = median(a), mb = median(b);
  const bool pass = ma < mb && wins >= 4 && aborted == 0 && secs <= 600.0;
  return {pass, fmt("coeff_error median %.4f vs misaligned %.4f, %d/5 seeds, %d aborted, %.0f s", ma, mb, wins,
                    aborted, secs)};
}

Outcome earthquake_run(const fs::path& work) {
  CaseStudy cs;
  cs.tag = "earthquake";
  cs.run_count = 3;
  cs.base_seed = 1;
  cs.variants = {"M1"};
  const auto s = run_case(cs, work);
  double worst_tv = 0.0, lo = 1.0, hi = 0.0;
  bool finite = true;
  for (const auto& r : s.runs) {
    const double tv = r.metrics.at("max_tv"), a0 = r.metrics.at("auc_min"), a1 = r.metrics.at("auc_max");
    finite = finite && std::isfinite(tv) && std::isfinite(a0) && std::isfinite(a1) && !r.aborted;
    worst_tv = std::max(worst_tv, tv);
    lo = std::min(lo, a0);
    hi = std::max(hi, a1);
  }
  const bool pass = finite && s.runs.size() == 3 && worst_tv < 0.15 && lo >= 0.35 && hi <= 0.65;
  return {pass, fmt("max node TV %.4f, AUC range [%.3f, %.3f] over 3 seeds", worst_tv, lo, hi)};
}

Outcome determinism(const fs::path& work) {
  int same = 0, total = 0;
  for (const char* tag : {"hasse", "earthquake"}) {
    CaseStudy cs;
    cs.tag = tag;
    cs.base_seed = 1;
    if (std::string(tag) == "earthquake") cs.variants = {"M1"};
    const auto variants = case_variants(cs, 1);
    const auto& variant = std::string(tag) == "hasse" ? variants[1] : variants[0];
    const fs::path first = work / tag / variant.name / "run_1" / "history.csv";
    const fs::path again = work / "rerun" / tag;
    fs::create_directories(again);
    run_single(cs, variant, 1, again);
    ++total;
    if (fs::exists(first) && read_text_file(first) == read_text_file(again / "history.csv")) ++same;
  }
  return {same == total, fmt("%d/%d reruns byte-identical", same, total)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance_runs";
  for (int k = 1; k + 1 < argc; ++k) {
    if (std::string(argv[k]) == "--workdir") work = argv[k + 1];
  }
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", gradient_suite},
      {"oracle sandwich", [] { return sweep("sandwich", 1000, 1); }},
      {"strong duality", [] { return sweep("duality", 200, 2); }},
      {"KL chain identity", kl_chain_identity},
      {"data processing", [] { return sweep("data-processing", 1000, 3); }},
      {"lower bound", [] { return sweep("lower-bound", 1000, 4); }},
      {"infimal certificates", infimal},
      {"proximal OT", proximal_ot_checks},
      {"W1-Lipschitz kernels", kernel_lipschitz},
      {"diagnostics oracles", diagnostics_oracles},
      {"Hasse directional", [&] { return hasse_directional(work); }},
      {"EARTHQUAKE desk run", [&] { return earthquake_run(work); }},
      {"determinism", [&] { return determinism(work); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2zu %s  %-22s %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
