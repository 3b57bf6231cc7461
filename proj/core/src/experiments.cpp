#include "gigan/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <thread>

#include "gigan/diagnostics.hpp"
#include "gigan/errors.hpp"
#include "gigan/networks.hpp"
#include "gigan/oracle.hpp"

namespace gigan {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;
constexpr std::uint64_t kFinalStream = 0x66696e616c;
constexpr int kFinalSamples = 4000;

bool is_training_case(const std::string& tag) {
  return tag == "hasse" || tag == "ball" || tag == "child" || tag == "earthquake";
}

std::string cell(double v) { return format_double(v); }

}  // namespace

std::string to_string(Scale s) { return s == Scale::Desk ? "desk" : "paper"; }

Scale parse_scale(const std::string& name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  throw ParseError("unknown scale '" + name + "'");
}

void CaseStudy::validate() const {
  if (!is_training_case(tag) && tag != "certify") throw ParseError("unknown case '" + tag + "'");
  if (run_count < 1) throw DomainError("run_count must be at least 1");
  if (samples && *samples < 10) throw DomainError("samples must be at least 10");
  if (epochs && *epochs < 0) throw DomainError("epochs must be nonnegative");
  if (certify_trials < 1) throw DomainError("certify_trials must be positive");
}

std::vector<std::uint64_t> case_seeds(const CaseStudy& cs) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < cs.run_count; ++k) seeds.push_back(cs.base_seed + static_cast<std::uint64_t>(k));
  return seeds;
}

int default_thread_count() {
  if (const char* env = std::getenv("GIGAN_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

int case_sample_count(const CaseStudy& cs) {
  if (cs.samples) return *cs.samples;
  const bool desk = cs.scale == Scale::Desk;
  if (cs.tag == "hasse") return desk ? 4000 : 32000;
  if (cs.tag == "ball") return desk ? 4000 : 32000;
  if (cs.tag == "child") return desk ? 8000 : 64000;
  if (cs.tag == "earthquake") return 8000;
  return 0;
}

std::vector<VariantSetup> case_variants(const CaseStudy& cs, std::uint64_t seed) {
  const bool desk = cs.scale == Scale::Desk;
  TrainConfig base;
  base.seed = seed;
  std::vector<VariantSetup> out;
  auto add = [&](const std::string& name, const TrainConfig& c) {
    if (cs.variants.empty() || std::find(cs.variants.begin(), cs.variants.end(), name) != cs.variants.end()) {
      out.push_back({name, c});
    }
  };
  if (cs.tag == "hasse") {
    base.objective = ObjectiveForm::DvKl;
    base.batch_size = 256;
    base.lr_disc = 1e-3;
    base.lr_gen = 3e-3;
    base.max_epochs = desk ? 20 : 60;
    base.latent_dim = 8;
    base.generator_hidden = {};
    base.generator_activation = Activation::Identity;
    base.critic_hidden = {16, 16};
    base.early_stop.metric = "energy_distance";
    base.early_stop.patience = 5;
    base.early_stop.threshold = 0.05;
    TrainConfig m = base, g = base, x = base;
    m.mode = DiscriminatorMode::Monolithic;
    g.mode = DiscriminatorMode::GraphInformed;
    x.mode = DiscriminatorMode::Misaligned;
    x.misaligned_seed = seed;
    add("monolithic", m);
    add("graph_informed", g);
    add("misaligned", x);
  } else if (cs.tag == "ball") {
    base.objective = ObjectiveForm::DvKl;
    base.batch_size = 256;
    base.lr_disc = 5e-4;
    base.lr_gen = 1e-3;
    base.max_epochs = desk ? 30 : 100;
    base.latent_dim = 64;
    base.generator_hidden = {128, 128};
    base.generator_activation = Activation::Swish;
    base.critic_hidden = {32, 32};
    BallModel model;
    for (bool sn : {true, false}) {
      TrainConfig m = base, g = base;
      m.mode = DiscriminatorMode::Monolithic;
      g.mode = DiscriminatorMode::GraphInformed;
      g.families = ball_families(model.m_plus_1);
      m.spectral_norm = g.spectral_norm = sn;
      const std::string suffix = sn ? "_sn" : "_nosn";
      add("monolithic" + suffix, m);
      add("graph_informed" + suffix, g);
    }
  } else if (cs.tag == "child") {
    base.objective = ObjectiveForm::FganJs;
    base.batch_size = 512;
    base.lr_disc = desk ? 2e-3 : 5e-4;
    base.lr_gen = desk ? 5e-4 : 5e-5;
    base.max_epochs = desk ? 30 : 150;
    base.latent_dim = 32;
    base.generator_hidden = {64, 64, 64, 64};
    base.generator_activation = Activation::Swish;
    base.critic_hidden = {16, 8, 4};
    base.early_stop.metric = "avg_loglik";
    base.early_stop.patience = 20;
    base.early_stop.min_delta = 1e-3;
    TrainConfig m = base, m1 = base, m3 = base;
    m.mode = DiscriminatorMode::Monolithic;
    m1.mode = DiscriminatorMode::GraphInformed;
    m1.depth = 1;
    m3.mode = DiscriminatorMode::GraphInformed;
    m3.depth = 3;
    add("M", m);
    add("M1", m1);
    add("M3", m3);
  } else if (cs.tag == "earthquake") {
    base.objective = ObjectiveForm::FganJs;
    base.batch_size = 256;
    base.lr_disc = desk ? 2e-3 : 1e-4;
    base.lr_gen = desk ? 5e-4 : 5e-5;
    base.max_epochs = desk ? 60 : 120;
    base.latent_dim = 16;
    base.generator_hidden = {32, 32};
    base.generator_activation = Activation::Swish;
    base.critic_hidden = {32, 32};
    base.early_stop.metric = "avg_loglik";
    base.early_stop.patience = 20;
    base.early_stop.min_delta = 1e-3;
    TrainConfig m = base, m1 = base;
    m.mode = DiscriminatorMode::Monolithic;
    m1.mode = DiscriminatorMode::GraphInformed;
    add("M", m);
    add("M1", m1);
  }
  for (const auto& want : cs.variants) {
    if (std::none_of(out.begin(), out.end(), [&](const VariantSetup& v) { return v.name == want; })) {
      throw DomainError("case " + cs.tag + " has no variant '" + want + "'");
    }
  }
  for (auto& v : out) {
    if (cs.epochs) v.config.max_epochs = *cs.epochs;
    if (!cs.overrides_json.empty()) {
      nlohmann::json merged = nlohmann::json::parse(config_to_json(v.config));
      nlohmann::json patch;
      try {
        patch = nlohmann::json::parse(cs.overrides_json);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("overrides: ") + e.what());
      }
      merged.merge_patch(patch);
      merged["seed"] = seed;
      v.config = config_from_json(merged.dump());
    }
  }
  return out;
}

namespace {

struct CaseData {
  Dag dag;
  SampleBatch data;
  std::optional<AnyNet> net;
  std::optional<BallModel> ball;
};

CaseData build_case_data(const CaseStudy& cs, std::uint64_t seed) {
  const int n = case_sample_count(cs);
  const std::uint64_t data_seed = mix_seed(seed, kDataStream);
  CaseData d;
  if (cs.tag == "hasse") {
    LinearGaussianNet net = hasse_gaussian_net(3, seed);
    d.dag = net.dag();
    d.data = ancestral_sample(net, n, data_seed);
    d.net = AnyNet(std::move(net));
  } else if (cs.tag == "ball") {
    BallModel model;
    d.dag = ball_dag(model.m_plus_1);
    d.data = ball_sample(model, n, data_seed);
    d.ball = model;
  } else {
    DiscreteBayesNet net;
    if (cs.network_file) {
      AnyNet loaded = load_network(*cs.network_file);
      if (!std::holds_alternative<DiscreteBayesNet>(loaded)) {
        throw InvalidNetwork("case " + cs.tag + " needs a categorical network file");
      }
      net = std::get<DiscreteBayesNet>(std::move(loaded));
    } else {
      net = cs.tag == "child" ? child_net(seed) : earthquake_net(seed);
    }
    d.dag = net.dag();
    d.data = ancestral_sample(net, n, data_seed);
    d.net = AnyNet(std::move(net));
  }
  return d;
}

}  // namespace

RunSummary run_single(const CaseStudy& cs, const VariantSetup& variant, std::uint64_t seed,
                      const std::filesystem::path& run_dir, RunHistory* history_out) {
  CaseData d = build_case_data(cs, seed);
  const AnyNet* net = d.net ? &*d.net : nullptr;
  const DiscreteBayesNet* discrete = net ? std::get_if<DiscreteBayesNet>(net) : nullptr;
  TrainResult tr = train(variant.config, d.data, d.dag, net);
  const int critic_count = static_cast<int>(tr.state.critics.size());
  if (!run_dir.empty()) tr.history.write_csv(run_dir / "history.csv", critic_count);

  RunSummary s;
  s.variant = variant.name;
  s.seed = seed;
  s.aborted = tr.history.aborted;
  s.metrics["aborted"] = s.aborted ? 1.0 : 0.0;
  s.metrics["epochs"] = tr.state.epoch;
  double best_objective = HUGE_VAL;
  for (const auto& r : tr.history.records) {
    if (r.split == "val" && std::isfinite(r.objective)) best_objective = std::min(best_objective, r.objective);
  }
  s.metrics["best_val_objective"] = std::isfinite(best_objective) ? best_objective : std::nan("");

  TrainConfig cfg = variant.config;
  if (discrete && cfg.cardinalities.empty()) cfg.cardinalities = discrete->cardinalities();
  const std::uint64_t final_seed = mix_seed(seed, kFinalStream);
  SampleBatch generated = generator_sample(tr.state, cfg, kFinalSamples, final_seed);
  Matrix encoded = discrete ? dummy_encode(d.data, cfg.cardinalities).first.data : d.data.data;
  Matrix val = slice_rows(encoded, tr.validation_rows);
  EpochRecord final_diag = validation_diagnostics(tr.state, cfg, val, kFinalStream, discrete);
  s.metrics["energy_distance"] = final_diag.energy_distance;
  if (!final_diag.auc.empty()) {
    s.metrics["auc_min"] = *std::min_element(final_diag.auc.begin(), final_diag.auc.end());
    s.metrics["auc_max"] = *std::max_element(final_diag.auc.begin(), final_diag.auc.end());
  }
  if (discrete) {
    auto tv = node_tv(generated, *discrete);
    s.metrics["avg_loglik"] = avg_loglik_truth(generated, *discrete).mean;
    s.metrics["max_tv"] = *std::max_element(tv.begin(), tv.end());
    s.metrics["mean_tv"] = std::accumulate(tv.begin(), tv.end(), 0.0) / static_cast<double>(tv.size());
  } else if (net) {
    s.metrics["coeff_error"] = parent_coeff_error(generated, std::get<LinearGaussianNet>(*net));
  }
  if (d.ball) {
    BallFit fit = fit_ball_physics(generated, d.ball->m_plus_1);
    s.metrics["g_hat"] = fit.g_hat;
    s.metrics["v0_mean"] = fit.v0_mean;
    s.metrics["v0_std"] = fit.v0_std;
  }
  if (history_out) *history_out = std::move(tr.history);
  return s;
}

std::vector<std::string> CaseSummary::variant_names() const {
  std::vector<std::string> names;
  for (const auto& r : runs) {
    if (std::find(names.begin(), names.end(), r.variant) == names.end()) names.push_back(r.variant);
  }
  return names;
}

std::vector<double> CaseSummary::metric_values(const std::string& variant, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : runs) {
    if (r.variant != variant) continue;
    auto it = r.metrics.find(metric);
    if (it != r.metrics.end() && std::isfinite(it->second)) out.push_back(it->second);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<PairedComparison> compare_variants(const CaseSummary& summary) {
  const auto names = summary.variant_names();
  std::map<std::string, std::map<std::uint64_t, const RunSummary*>> by_variant;
  for (const auto& r : summary.runs) by_variant[r.variant][r.seed] = &r;
  std::vector<PairedComparison> out;
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      const auto& ra = by_variant[names[a]];
      const auto& rb = by_variant[names[b]];
      std::set<std::uint64_t> sa, sb;
      for (const auto& [seed, _] : ra) sa.insert(seed);
      for (const auto& [seed, _] : rb) sb.insert(seed);
      if (sa != sb) throw UnpairedRuns("variants " + names[a] + " and " + names[b] + " do not share their seeds");
      for (const auto& [metric, lower] : summary.lower_is_better) {
        PairedComparison c;
        c.metric = metric;
        c.variant_a = names[a];
        c.variant_b = names[b];
        for (const auto& [seed, run_a] : ra) {
          const RunSummary* run_b = rb.at(seed);
          auto ia = run_a->metrics.find(metric);
          auto ib = run_b->metrics.find(metric);
          if (ia == run_a->metrics.end() || ib == run_b->metrics.end()) continue;
          if (!std::isfinite(ia->second) || !std::isfinite(ib->second)) continue;
          const double diff = ia->second - ib->second;
          c.differences.push_back(diff);
          ++c.pairs;
          if (diff == 0.0) {
            ++c.ties;
          } else if ((diff < 0.0) == lower) {
            ++c.a_better;
          } else {
            ++c.b_better;
          }
        }
        if (c.pairs == 0) continue;
        c.median_difference = median(c.differences);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

namespace {

void write_summary(const CaseSummary& summary, const std::filesystem::path& dir) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& v : summary.variant_names()) {
    int aborted = 0, runs = 0;
    for (const auto& r : summary.runs) {
      if (r.variant != v) continue;
      ++runs;
      if (r.aborted) ++aborted;
    }
    std::set<std::string> metrics;
    for (const auto& r : summary.runs) {
      if (r.variant == v) {
        for (const auto& [m, _] : r.metrics) metrics.insert(m);
      }
    }
    for (const auto& m : metrics) {
      auto vals = summary.metric_values(v, m);
      rows.push_back({v, m, std::to_string(runs), std::to_string(vals.size()), cell(median(vals)),
                      cell(quantile(vals, 0.25)), cell(quantile(vals, 0.75)), std::to_string(aborted)});
    }
  }
  write_text_csv(dir / "summary.csv", {"variant", "metric", "runs", "finite", "median", "q1", "q3", "aborted_runs"},
                 rows);
  std::vector<std::vector<std::string>> pair_rows;
  if (summary.variant_names().size() >= 2) {
    for (const auto& c : compare_variants(summary)) {
      pair_rows.push_back({c.metric, c.variant_a, c.variant_b, std::to_string(c.pairs), std::to_string(c.a_better),
                           std::to_string(c.b_better), std::to_string(c.ties), cell(c.median_difference)});
    }
  }
  write_text_csv(dir / "pairs.csv",
                 {"metric", "variant_a", "variant_b", "pairs", "a_better", "b_better", "ties", "median_difference"},
                 pair_rows);
}

std::map<std::string, bool> metric_directions(const std::string& tag) {
  std::map<std::string, bool> m = {{"energy_distance", true}, {"aborted", true}};
  if (tag == "hasse") {
    m["coeff_error"] = true;
    m["best_val_objective"] = true;
  }
  if (tag == "child" || tag == "earthquake") {
    m["avg_loglik"] = false;
    m["max_tv"] = true;
    m["mean_tv"] = true;
  }
  return m;
}

}  // namespace

CaseSummary run_case(const CaseStudy& cs, const std::filesystem::path& out_dir) {
  cs.validate();
  const std::filesystem::path case_dir = out_dir / cs.tag;
  std::filesystem::create_directories(case_dir);
  CaseSummary summary;
  summary.tag = cs.tag;
  if (cs.tag == "certify") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& check : oracle_check_names()) {
      CheckTable t = run_oracle_check(check, cs.certify_trials, cs.base_seed);
      write_text_csv(case_dir / (check + ".csv"), t.header, t.rows);
      RunSummary r;
      r.variant = check;
      r.seed = cs.base_seed;
      r.metrics["trials"] = t.trials;
      r.metrics["failures"] = t.failures;
      summary.runs.push_back(r);
      rows.push_back({check, std::to_string(t.trials), std::to_string(t.failures), t.failures == 0 ? "holds" : "fails"});
    }
    write_text_csv(case_dir / "summary.csv", {"check", "trials", "failures", "verdict"}, rows);
    return summary;
  }
  summary.lower_is_better = metric_directions(cs.tag);
  struct Job {
    VariantSetup variant;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto seed : case_seeds(cs)) {
    for (auto& v : case_variants(cs, seed)) jobs.push_back({std::move(v), seed});
  }
  std::vector<RunSummary> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const auto& job = jobs[k];
      const auto dir = case_dir / job.variant.name / ("run_" + std::to_string(job.seed));
      try {
        results[k] = run_single(cs, job.variant, job.seed, dir);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(cs.threads > 0 ? cs.threads : default_thread_count(),
                                                static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (!errors[k].empty()) throw Error("run " + jobs[k].variant.name + " seed " + std::to_string(jobs[k].seed) + ": " + errors[k]);
  }
  summary.runs = std::move(results);
  write_summary(summary, case_dir);
  return summary;
}

// ---------------------------------------------------------------------------
// Oracle sweeps

namespace {

Vector dirichlet(Rng& rng, int size) {
  Vector v(size);
  for (int k = 0; k < size; ++k) v[k] = rng.gamma(1.0);
  return v / v.sum();
}

FinitePmf random_grid(Rng& rng) {
  const int vars = 1 + static_cast<int>(rng.index(2));
  std::vector<int> ids, cards;
  for (int v = 0; v < vars; ++v) {
    ids.push_back(v);
    cards.push_back(2 + static_cast<int>(rng.index(2)));
  }
  return FinitePmf::uniform(ids, cards);
}

DivergenceSpec random_spec(Rng& rng, int trial) {
  DivergenceSpec s;
  s.f = trial % 2 == 0 ? FKind::KL : FKind::JS;
  const double bounds[] = {0.25, 0.5, 1.0, 2.0};
  const double b = bounds[rng.index(4)];
  s.gamma = (trial / 2) % 3 == 2 ? GammaClass::sup_bounded(b) : GammaClass::lipschitz(b);
  return s;
}

std::string spec_label(const DivergenceSpec& s) { return to_string(s.f) + "/" + to_string(s.gamma.kind); }

/// Binary or ternary DAG on 3 nodes: chain, fork or collider.
DiscreteBayesNet random_small_net(Rng& rng, bool binary_chain) {
  std::vector<Edge> edges;
  const int shape = binary_chain ? 0 : static_cast<int>(rng.index(3));
  if (shape == 0) edges = {{0, 1}, {1, 2}};
  if (shape == 1) edges = {{0, 1}, {0, 2}};
  if (shape == 2) edges = {{0, 2}, {1, 2}};
  std::vector<int> cards(3, 2);
  if (!binary_chain) {
    for (int& c : cards) c = 2 + static_cast<int>(rng.index(2));
  }
  return random_cpts(Dag(3, edges), cards, 1.0, rng.next_u64());
}

CheckTable sandwich(int trials, std::uint64_t seed) {
  CheckTable t;
  t.header = {"trial", "support", "spec", "bound", "value", "f_divergence", "ipm", "verdict"};
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    FinitePmf grid = random_grid(rng);
    FinitePmf q = grid.with_probs(dirichlet(rng, grid.size()));
    FinitePmf p = grid.with_probs(dirichlet(rng, grid.size()));
    DivergenceSpec s = random_spec(rng, k);
    const double v = f_gamma_divergence(q, p, s).value;
    const double fd = f_divergence(q, p, s.f);
    const double w = ipm(q, p, s);
    const bool ok = v >= -1e-12 && v <= std::min(fd, w) + 1e-6;
    if (!ok) ++t.failures;
    t.rows.push_back({std::to_string(k), std::to_string(grid.size()), spec_label(s), cell(s.gamma.bound), cell(v),
                      cell(fd), cell(w), ok ? "holds" : "fails"});
  }
  t.trials = trials;
  return t;
}

CheckTable duality(int trials, std::uint64_t seed) {
  CheckTable t;
  t.header = {"trial", "support", "spec", "bound", "primal", "dual", "gap", "residual", "verdict"};
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    FinitePmf grid = random_grid(rng);
    FinitePmf q = grid.with_probs(dirichlet(rng, grid.size()));
    FinitePmf p = grid.with_probs(dirichlet(rng, grid.size()));
    DivergenceSpec s = random_spec(rng, k);
    auto primal = f_gamma_divergence(q, p, s);
    auto dual = f_gamma_dual(q, p, s);
    const double gap = std::abs(primal.value - dual.value);
    const double res = optimality_residual(p.probs(), primal.r_star, dual, s.f);
    const bool ok = gap < 1e-3 && res < 1e-3;
    if (!ok) ++t.failures;
    t.rows.push_back({std::to_string(k), std::to_string(grid.size()), spec_label(s), cell(s.gamma.bound),
                      cell(primal.value), cell(dual.value), cell(gap), cell(res), ok ? "holds" : "fails"});
  }
  t.trials = trials;
  return t;
}

CheckTable data_processing(int trials, std::uint64_t seed) {
  CheckTable t;
  t.header = {"trial", "node", "spec", "lhs", "rhs", "slack", "verdict"};
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    DiscreteBayesNet q = random_small_net(rng, k % 2 == 0);
    const int node = static_cast<int>(rng.index(3));
    int fam_size = 1;
    for (int v : family_of(q.dag(), node)) fam_size *= q.cardinalities()[v];
    Vector p_fam = dirichlet(rng, fam_size);
    DivergenceSpec s;
    s.f = (k / 2) % 2 == 0 ? FKind::KL : FKind::JS;
    s.gamma = (k / 4) % 2 == 0 ? GammaClass::all_bounded() : GammaClass::lipschitz(1.0);
    auto rep = certify_data_processing(q, node, p_fam, s);
    if (!rep.holds) ++t.failures;
    t.rows.push_back({std::to_string(k), std::to_string(node), spec_label(s), cell(rep.lhs), cell(rep.rhs),
                      cell(rep.slack), rep.holds ? "holds" : "fails"});
  }
  t.trials = trials;
  return t;
}

CheckTable lower_bound(int trials, std::uint64_t seed) {
  CheckTable t;
  t.header = {"trial", "spec", "local_average", "global", "verdict"};
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    DiscreteBayesNet q = random_small_net(rng, k % 2 == 0);
    DiscreteBayesNet p = random_cpts(q.dag(), q.cardinalities(), 1.0, rng.next_u64());
    DivergenceSpec s;
    s.f = (k / 2) % 2 == 0 ? FKind::KL : FKind::JS;
    s.gamma = (k / 4) % 3 == 2 ? GammaClass::all_bounded() : GammaClass::lipschitz(1.0);
    auto rep = certify_lower_bound(q, p, s);
    if (!rep.holds) ++t.failures;
    t.rows.push_back({std::to_string(k), spec_label(s), cell(rep.local_average), cell(rep.global),
                      rep.holds ? "holds" : "fails"});
  }
  t.trials = trials;
  return t;
}

CheckTable infimal(int trials, std::uint64_t seed) {
  CheckTable t;
  t.header = {"trial", "model_class", "discrepancy", "spec", "inf_global", "inf_local_average", "verdict"};
  const ModelClass classes[] = {ModelClass::AllPmfs, ModelClass::GraphFactorized, ModelClass::ProductPmfs};
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    DiscreteBayesNet q = random_small_net(rng, true);
    const ModelClass mc = classes[k % 3];
    DivergenceSpec s;
    s.f = (k / 3) % 2 == 0 ? FKind::KL : FKind::JS;
    s.gamma = GammaClass::lipschitz(1.0);
    InfimalOptions opt;
    opt.discrepancy = (k / 6) % 2 == 0 ? Discrepancy::FGamma : Discrepancy::Ipm;
    opt.seed = rng.next_u64();
    auto rep = certify_infimal_subadditivity(q, s, mc, opt);
    std::string verdict;
    if (!rep.asserted) {
      verdict = rep.holds ? "reported:holds" : "reported:fails";
    } else {
      const bool ok = rep.holds && rep.inf_global <= 1e-6 && rep.inf_local_average <= 1e-6;
      verdict = ok ? "holds" : "fails";
      if (!ok) ++t.failures;
    }
    t.rows.push_back({std::to_string(k), to_string(mc), opt.discrepancy == Discrepancy::FGamma ? "f_gamma" : "ipm",
                      spec_label(s), cell(rep.inf_global), cell(rep.inf_local_average), verdict});
  }
  t.trials = trials;
  return t;
}

CheckTable pot(int trials, std::uint64_t seed) {
  CheckTable t;
  t.header = {"trial", "support", "eps", "value", "transport", "eps_kl", "dual", "gap", "verdict"};
  const double eps_values[] = {0.1, 1.0, 10.0};
  for (int k = 0; k < trials; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    const int n = 2 + static_cast<int>(rng.index(15));
    Vector q = dirichlet(rng, n), p = dirichlet(rng, n);
    Eigen::MatrixXd c(n, n);
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) c(x, y) = std::abs(x - y) * (0.5 + rng.uniform());
    }
    const double eps = eps_values[k % 3];
    auto rep = dual_pot_check(q, p, c, eps);
    const double tc = transport_cost(q, p, c);
    const double ekl = eps * f_divergence(q, p, FKind::KL);
    const bool ok = rep.primal >= -1e-12 && rep.primal <= std::min(tc, ekl) + 1e-6 && rep.gap < 1e-3 &&
                    rep.gap > -1e-4;
    if (!ok) ++t.failures;
    t.rows.push_back({std::to_string(k), std::to_string(n), cell(eps), cell(rep.primal), cell(tc), cell(ekl),
                      cell(rep.dual), cell(rep.gap), ok ? "holds" : "fails"});
  }
  t.trials = trials;
  return t;
}

}  // namespace

const std::vector<std::string>& oracle_check_names() {
  static const std::vector<std::string> names = {"sandwich",    "duality",     "data-processing",
                                                 "lower-bound", "infimal",     "pot"};
  return names;
}

CheckTable run_oracle_check(const std::string& check, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be positive");
  CheckTable t;
  if (check == "sandwich") t = sandwich(trials, seed);
  else if (check == "duality") t = duality(trials, seed);
  else if (check == "data-processing") t = data_processing(trials, seed);
  else if (check == "lower-bound") t = lower_bound(trials, seed);
  else if (check == "infimal") t = infimal(trials, seed);
  else if (check == "pot") t = pot(trials, seed);
  else throw ParseError("unknown oracle check '" + check + "'");
  t.check = check;
  return t;
}

}  // namespace gigan
