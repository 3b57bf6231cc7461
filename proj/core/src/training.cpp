#include "gigan/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "gigan/diagnostics.hpp"
#include "gigan/errors.hpp"

namespace gigan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::uint64_t kGeneratorInit = 0x67656e;
constexpr std::uint64_t kCriticInit = 0x637269746963;
constexpr std::uint64_t kStepStream = 0x73746570;
constexpr std::uint64_t kSplitStream = 0x73706c6974;
constexpr std::uint64_t kEpochStream = 0x65706f6368;
constexpr std::uint64_t kEvalStream = 0x6576616c;
constexpr std::uint64_t kLatentStream = 0x6c6174656e74;

bool categorical(const TrainConfig& c) { return !c.cardinalities.empty(); }

struct FakeDraw {
  ForwardCache cache;
  Matrix fake;  // relaxed rows (categorical) or generator output
};

FakeDraw draw_fake(const GanState& state, const TrainConfig& config, int count, Rng& rng) {
  Matrix z(count, config.latent_dim);
  for (int r = 0; r < count; ++r) {
    for (int c = 0; c < config.latent_dim; ++c) z(r, c) = rng.normal();
  }
  FakeDraw d;
  Matrix out = state.generator.forward(z, &d.cache);
  if (categorical(config)) {
    d.fake = gumbel_softmax(out, *state.encoding, config.gumbel_temperature, rng).relaxed;
  } else {
    d.fake = std::move(out);
  }
  return d;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::string to_string(DiscriminatorMode mode) {
  switch (mode) {
    case DiscriminatorMode::Monolithic: return "monolithic";
    case DiscriminatorMode::GraphInformed: return "graph_informed";
    case DiscriminatorMode::Misaligned: return "misaligned";
  }
  return "graph_informed";
}

DiscriminatorMode parse_mode(const std::string& name) {
  if (name == "monolithic") return DiscriminatorMode::Monolithic;
  if (name == "graph_informed") return DiscriminatorMode::GraphInformed;
  if (name == "misaligned") return DiscriminatorMode::Misaligned;
  throw ParseError("unknown discriminator mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(lr_disc >= 0.0) || !(lr_gen >= 0.0)) throw DomainError("learning rates must be nonnegative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw DomainError("Adam betas must lie in [0, 1)");
  }
  if (batch_size < 2) throw DomainError("batch_size must be at least 2");
  if (!(split > 0.0 && split < 1.0)) throw DomainError("split must lie in (0, 1)");
  if (!cardinalities.empty() && !(gumbel_temperature > 0.0)) throw DomainError("gumbel_temperature must be positive");
  if (max_epochs < 0) throw DomainError("max_epochs must be nonnegative");
  if (latent_dim < 1) throw DomainError("latent_dim must be positive");
  if (depth < 0) throw DomainError("depth must be nonnegative");
  if (!(lipschitz_scale > 0.0)) throw DomainError("lipschitz_scale must be positive");
  if (power_iterations < 0 || eval_power_iterations < 0) throw DomainError("power iterations must be nonnegative");
  if (early_stop.metric != "none" && early_stop.metric != "avg_loglik" && early_stop.metric != "energy_distance" &&
      early_stop.metric != "objective") {
    throw DomainError("unknown early-stop metric '" + early_stop.metric + "'");
  }
  if (early_stop.patience < 1) throw DomainError("patience must be positive");
  for (int c : cardinalities) {
    if (c < 1) throw DomainError("cardinalities must be positive");
  }
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["mode"] = to_string(c.mode);
  j["depth"] = c.depth;
  j["misaligned_seed"] = c.misaligned_seed;
  if (c.families) {
    j["families"] = c.families->families;
    j["family_weights"] = c.families->weights;
  }
  j["objective"] = to_string(c.objective);
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["lr_disc"] = c.lr_disc;
  j["lr_gen"] = c.lr_gen;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["gumbel_temperature"] = c.gumbel_temperature;
  j["spectral_norm"] = c.spectral_norm;
  j["lipschitz_scale"] = c.lipschitz_scale;
  j["power_iterations"] = c.power_iterations;
  j["eval_power_iterations"] = c.eval_power_iterations;
  j["early_stop"] = {{"metric", c.early_stop.metric},
                     {"patience", c.early_stop.patience},
                     {"min_delta", c.early_stop.min_delta}};
  if (c.early_stop.threshold) j["early_stop"]["threshold"] = *c.early_stop.threshold;
  j["seed"] = c.seed;
  j["split"] = c.split;
  j["reuse_fake"] = c.reuse_fake;
  j["record_wall_clock"] = c.record_wall_clock;
  j["latent_dim"] = c.latent_dim;
  j["generator_hidden"] = c.generator_hidden;
  j["generator_activation"] = to_string(c.generator_activation);
  j["critic_hidden"] = c.critic_hidden;
  j["critic_activation"] = to_string(c.critic_activation);
  j["cardinalities"] = c.cardinalities;
  j["eval_samples"] = c.eval_samples;
  return j.dump(2);
}

TrainConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("train config must be a JSON object");
  TrainConfig c;
  try {
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    c.depth = j.value("depth", c.depth);
    c.misaligned_seed = j.value("misaligned_seed", c.misaligned_seed);
    if (j.contains("families")) {
      FamilySpec f;
      f.families = j["families"].get<std::vector<std::vector<int>>>();
      if (j.contains("family_weights")) {
        f.weights = j["family_weights"].get<std::vector<double>>();
      } else {
        f.weights.assign(f.families.size(), 1.0 / static_cast<double>(f.families.size()));
      }
      c.families = std::move(f);
    }
    if (j.contains("objective")) c.objective = parse_objective(j["objective"].get<std::string>());
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.lr_disc = j.value("lr_disc", c.lr_disc);
    c.lr_gen = j.value("lr_gen", c.lr_gen);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.gumbel_temperature = j.value("gumbel_temperature", c.gumbel_temperature);
    c.spectral_norm = j.value("spectral_norm", c.spectral_norm);
    c.lipschitz_scale = j.value("lipschitz_scale", c.lipschitz_scale);
    c.power_iterations = j.value("power_iterations", c.power_iterations);
    c.eval_power_iterations = j.value("eval_power_iterations", c.eval_power_iterations);
    if (j.contains("early_stop")) {
      const auto& e = j["early_stop"];
      c.early_stop.metric = e.value("metric", c.early_stop.metric);
      c.early_stop.patience = e.value("patience", c.early_stop.patience);
      c.early_stop.min_delta = e.value("min_delta", c.early_stop.min_delta);
      if (e.contains("threshold")) c.early_stop.threshold = e["threshold"].get<double>();
    }
    c.seed = j.value("seed", c.seed);
    c.split = j.value("split", c.split);
    c.reuse_fake = j.value("reuse_fake", c.reuse_fake);
    c.record_wall_clock = j.value("record_wall_clock", c.record_wall_clock);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.generator_hidden = j.value("generator_hidden", c.generator_hidden);
    if (j.contains("generator_activation")) {
      c.generator_activation = parse_activation(j["generator_activation"].get<std::string>());
    }
    c.critic_hidden = j.value("critic_hidden", c.critic_hidden);
    if (j.contains("critic_activation")) c.critic_activation = parse_activation(j["critic_activation"].get<std::string>());
    c.cardinalities = j.value("cardinalities", c.cardinalities);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::string> RunHistory::header(int critic_count) const {
  std::vector<std::string> h = {"epoch", "split", "objective", "energy_distance", "avg_loglik"};
  for (int i = 0; i < critic_count; ++i) h.push_back("auc_" + std::to_string(i));
  h.push_back("seconds");
  return h;
}

std::string RunHistory::to_csv(int critic_count) const {
  std::ostringstream out;
  const auto h = header(critic_count);
  for (std::size_t k = 0; k < h.size(); ++k) out << (k ? "," : "") << h[k];
  out << '\n';
  for (const auto& r : records) {
    out << r.epoch << ',' << r.split << ',' << format_double(r.objective) << ',' << format_double(r.energy_distance)
        << ',' << format_double(r.avg_loglik);
    for (int i = 0; i < critic_count; ++i) {
      out << ',' << format_double(i < static_cast<int>(r.auc.size()) ? r.auc[i] : kNaN);
    }
    out << ',' << format_double(r.seconds) << '\n';
  }
  return out.str();
}

void RunHistory::write_csv(const std::filesystem::path& path, int critic_count) const {
  write_text_file(path, to_csv(critic_count));
}

const EpochRecord* RunHistory::last_validation() const {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->split == "val") return &*it;
  }
  return nullptr;
}

GanState init_state(const TrainConfig& config, const Dag& dag, int data_dim) {
  config.validate();
  GanState s;
  if (config.families) {
    s.families = *config.families;
  } else {
    switch (config.mode) {
      case DiscriminatorMode::Monolithic: s.families = monolithic_family(data_dim); break;
      case DiscriminatorMode::GraphInformed: s.families = ancestor_families(dag, config.depth); break;
      case DiscriminatorMode::Misaligned: s.families = misaligned_families(dag, config.misaligned_seed); break;
    }
  }
  s.families.validate(data_dim);
  int out_dim = data_dim;
  if (categorical(config)) {
    if (static_cast<int>(config.cardinalities.size()) != data_dim) {
      throw ShapeMismatch("train: cardinalities do not match the data width");
    }
    s.encoding = Encoding::from_cardinalities(config.cardinalities);
    s.columns = family_columns(s.families, &*s.encoding);
    out_dim = s.encoding->total_dim;
  } else {
    s.columns = family_columns(s.families);
  }
  MlpSpec g;
  g.input_dim = config.latent_dim;
  g.hidden_widths = config.generator_hidden;
  g.output_dim = out_dim;
  g.hidden_activation = config.generator_activation;
  g.init_seed = mix_seed(config.seed, kGeneratorInit);
  s.generator = Mlp(g);
  s.generator_adam = AdamState(s.generator.parameter_count(), config.lr_gen);
  s.generator_adam.beta1 = config.adam_beta1;
  s.generator_adam.beta2 = config.adam_beta2;
  for (std::size_t i = 0; i < s.families.size(); ++i) {
    MlpSpec c;
    c.input_dim = static_cast<int>(s.columns[i].size());
    c.hidden_widths = config.critic_hidden;
    c.output_dim = 1;
    c.hidden_activation = config.critic_activation;
    c.spectral_norm = config.spectral_norm;
    c.lipschitz_scale = config.lipschitz_scale;
    c.init_seed = mix_seed(mix_seed(config.seed, kCriticInit), i);
    s.critics.emplace_back(c);
    s.critic_adams.emplace_back(s.critics.back().parameter_count(), config.lr_disc);
    s.critic_adams.back().beta1 = config.adam_beta1;
    s.critic_adams.back().beta2 = config.adam_beta2;
  }
  return s;
}

SampleBatch generator_sample(const GanState& state, const TrainConfig& config, int count, std::uint64_t seed,
                             bool relaxed) {
  Rng rng(seed, kLatentStream);
  Matrix z(count, config.latent_dim);
  for (int r = 0; r < count; ++r) {
    for (int c = 0; c < config.latent_dim; ++c) z(r, c) = rng.normal();
  }
  Matrix out = state.generator.forward(z);
  if (!categorical(config)) return identity_schema_batch(std::move(out));
  GumbelSample g = gumbel_softmax(out, *state.encoding, config.gumbel_temperature, rng);
  if (relaxed) return identity_schema_batch(std::move(g.relaxed));
  return dummy_decode(gumbel_hard(out, g.noise, *state.encoding), *state.encoding);
}

double train_step(GanState& state, const TrainConfig& config, const Matrix& real_batch) {
  Rng rng(mix_seed(config.seed, kStepStream), static_cast<std::uint64_t>(state.step));
  const int B = static_cast<int>(real_batch.rows());
  FakeDraw critic_draw = draw_fake(state, config, B, rng);
  GraphObjectiveOptions critic_opts;
  critic_opts.fake_grad = config.reuse_fake;
  auto obj = graph_informed_objective(config.objective, state.families, state.columns, state.critics, real_batch,
                                      critic_draw.fake, critic_opts);

  FakeDraw fresh;
  const FakeDraw* gen_draw = &critic_draw;
  Matrix fake_grad;
  if (config.reuse_fake) {
    fake_grad = std::move(obj.fake_grad);
  } else {
    fresh = draw_fake(state, config, B, rng);
    gen_draw = &fresh;
    GraphObjectiveOptions gen_opts;
    gen_opts.critic_grads = false;
    fake_grad = graph_informed_objective(config.objective, state.families, state.columns, state.critics, real_batch,
                                         fresh.fake, gen_opts)
                    .fake_grad;
  }
  Matrix out_grad = categorical(config)
                        ? gumbel_softmax_backward(gen_draw->fake, fake_grad, *state.encoding, config.gumbel_temperature)
                        : fake_grad;
  std::vector<double> gen_grad(state.generator.parameter_count(), 0.0);
  state.generator.backward(gen_draw->cache, out_grad, gen_grad);

  // Critics ascend, the generator descends.
  for (std::size_t i = 0; i < state.critics.size(); ++i) {
    auto& g = obj.critic_grads[i];
    for (double& v : g) v = -v;
    adam_step(state.critic_adams[i], state.critics[i].params(), g);
    if (config.spectral_norm && config.lr_disc > 0.0 && config.power_iterations > 0) {
      state.critics[i].refresh_spectral(config.power_iterations);
    }
    if (!all_finite(state.critics[i].params())) {
      throw NonFiniteObjective("critic " + std::to_string(i) + " parameters became non-finite");
    }
  }
  adam_step(state.generator_adam, state.generator.params(), gen_grad);
  if (!all_finite(state.generator.params())) throw NonFiniteObjective("generator parameters became non-finite");
  ++state.step;
  return obj.value;
}

Matrix critic_scores(const GanState& state, const Matrix& batch) {
  Matrix out(batch.rows(), static_cast<Eigen::Index>(state.critics.size()));
  for (std::size_t i = 0; i < state.critics.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = state.critics[i].forward(slice_columns(batch, state.columns[i])).col(0);
  }
  return out;
}

EpochRecord validation_diagnostics(const GanState& state, const TrainConfig& config, const Matrix& val_encoded,
                                   std::uint64_t tag, const DiscreteBayesNet* discrete) {
  GanState eval = state;
  if (config.spectral_norm && config.eval_power_iterations > 0) {
    for (auto& c : eval.critics) c.refresh_spectral(config.eval_power_iterations);
  }
  const int m = config.eval_samples > 0 ? config.eval_samples : static_cast<int>(val_encoded.rows());
  SampleBatch fake = generator_sample(eval, config, m, mix_seed(mix_seed(config.seed, kEvalStream), tag));
  Matrix fake_encoded = categorical(config) ? dummy_encode(fake, config.cardinalities).first.data : fake.data;

  EpochRecord r;
  r.epoch = static_cast<int>(state.epoch);
  r.split = "val";
  GraphObjectiveOptions none;
  none.critic_grads = false;
  none.fake_grad = false;
  try {
    r.objective = graph_informed_objective(config.objective, eval.families, eval.columns, eval.critics, val_encoded,
                                           fake_encoded, none)
                      .value;
  } catch (const NonFiniteObjective&) {
    r.objective = kNaN;
  }
  r.energy_distance = energy_distance(val_encoded, fake_encoded);
  r.avg_loglik = discrete ? avg_loglik_truth(fake, *discrete).mean : kNaN;
  Matrix sr = critic_scores(eval, val_encoded);
  Matrix sf = critic_scores(eval, fake_encoded);
  for (Eigen::Index i = 0; i < sr.cols(); ++i) {
    Vector a = sr.col(i), b = sf.col(i);
    r.auc.push_back(auc(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                        std::span<const double>(b.data(), static_cast<std::size_t>(b.size()))));
  }
  return r;
}

namespace {

double watched_metric(const EpochRecord& r, const std::string& metric) {
  if (metric == "avg_loglik") return r.avg_loglik;
  if (metric == "energy_distance") return -r.energy_distance;
  if (metric == "objective") return -r.objective;
  return kNaN;
}

}  // namespace

TrainResult train(const TrainConfig& config_in, const SampleBatch& data, const Dag& dag,
                  const AnyNet* net_for_diagnostics) {
  TrainConfig config = config_in;
  const DiscreteBayesNet* discrete = net_for_diagnostics ? std::get_if<DiscreteBayesNet>(net_for_diagnostics) : nullptr;
  if (discrete && config.cardinalities.empty()) config.cardinalities = discrete->cardinalities();
  config.validate();
  if (data.cols() != dag.node_count()) throw ShapeMismatch("train: data width does not match the graph");

  const int n = data.rows();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(mix_seed(config.seed, kSplitStream));
  split_rng.shuffle(std::span<int>(order));
  const int n_train = static_cast<int>(std::lround(config.split * n));
  if (n_train < config.batch_size || n - n_train < 2) {
    throw DomainError("train: need at least batch_size training rows and 2 validation rows");
  }
  Matrix encoded = categorical(config) ? dummy_encode(data, config.cardinalities).first.data : data.data;
  std::vector<int> train_rows(order.begin(), order.begin() + n_train);
  std::vector<int> val_rows(order.begin() + n_train, order.end());
  Matrix val = slice_rows(encoded, val_rows);

  TrainResult res;
  res.validation_rows = val_rows;
  res.state = init_state(config, dag, dag.node_count());
  GanState& state = res.state;
  const int critic_count = static_cast<int>(state.critics.size());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (!config.record_wall_clock) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const bool watching = config.early_stop.metric != "none";
  int stale = 0;
  const int batches = n_train / config.batch_size;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng epoch_rng(mix_seed(config.seed, kEpochStream), static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(std::span<int>(train_rows));
    double total = 0.0;
    try {
      for (int b = 0; b < batches; ++b) {
        std::span<const int> idx(train_rows.data() + static_cast<std::ptrdiff_t>(b) * config.batch_size,
                                 static_cast<std::size_t>(config.batch_size));
        total += train_step(state, config, slice_rows(encoded, idx));
      }
    } catch (const NonFiniteObjective& e) {
      res.history.aborted = true;
      res.history.abort_reason = e.what();
      break;
    }
    state.epoch = epoch;
    EpochRecord tr;
    tr.epoch = epoch;
    tr.split = "train";
    tr.objective = total / batches;
    tr.energy_distance = kNaN;
    tr.avg_loglik = kNaN;
    tr.auc.assign(critic_count, kNaN);
    tr.seconds = elapsed();
    res.history.records.push_back(std::move(tr));

    EpochRecord vr = validation_diagnostics(state, config, val, static_cast<std::uint64_t>(epoch), discrete);
    vr.seconds = elapsed();
    const double metric = watched_metric(vr, config.early_stop.metric);
    res.history.records.push_back(std::move(vr));
    if (!watching) continue;
    if (config.early_stop.threshold) {
      // Watched values are negated for minimized metrics.
      const double raw = config.early_stop.metric == "avg_loglik" ? metric : -metric;
      const bool below = std::isfinite(raw) && raw < *config.early_stop.threshold;
      stale = below ? stale + 1 : 0;
      if (stale >= config.early_stop.patience) {
        res.history.early_stopped = true;
        break;
      }
      continue;
    }
    if (std::isfinite(metric) && (!state.best_metric || metric > *state.best_metric + config.early_stop.min_delta)) {
      state.best_metric = metric;
      state.best_epoch = epoch;
      state.best_generator = state.generator;
      state.best_critics = state.critics;
      stale = 0;
    } else if (++stale >= config.early_stop.patience) {
      res.history.early_stopped = true;
      break;
    }
  }
  if (watching && !config.early_stop.threshold && state.best_metric) {
    state.generator = state.best_generator;
    state.critics = state.best_critics;
  }
  return res;
}

std::string checkpoint_to_json(const GanState& state, const TrainConfig& config) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(config));
  j["epoch"] = state.epoch;
  j["step"] = state.step;
  j["families"] = state.families.families;
  j["generator"] = nlohmann::json::parse(mlp_to_json(state.generator));
  j["critics"] = nlohmann::json::array();
  for (const auto& c : state.critics) j["critics"].push_back(nlohmann::json::parse(mlp_to_json(c)));
  return j.dump();
}

}  // namespace gigan
