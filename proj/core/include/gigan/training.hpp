#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gigan/bayesnet.hpp"
#include "gigan/graph.hpp"
#include "gigan/io.hpp"
#include "gigan/nn.hpp"
#include "gigan/objectives.hpp"

namespace gigan {

enum class DiscriminatorMode { Monolithic, GraphInformed, Misaligned };

std::string to_string(DiscriminatorMode mode);
DiscriminatorMode parse_mode(const std::string& name);

struct EarlyStopConfig {
  /// "none", "avg_loglik" (maximized), "energy_distance" or "objective" (minimized).
  std::string metric = "none";
  int patience = 20;
  double min_delta = 1e-3;
  /// Threshold mode: stop once the metric stays below `threshold` for
  /// `patience` consecutive epochs, keeping the final parameters.
  std::optional<double> threshold;
};

struct TrainConfig {
  DiscriminatorMode mode = DiscriminatorMode::GraphInformed;
  /// Ancestor depth a of graph-informed families (1 = child-parent).
  int depth = 1;
  std::uint64_t misaligned_seed = 0;
  /// Replaces the mode-derived families when set.
  std::optional<FamilySpec> families;

  ObjectiveForm objective = ObjectiveForm::FganJs;
  int batch_size = 256;
  int max_epochs = 20;
  double lr_disc = 1e-3;
  double lr_gen = 1e-3;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double gumbel_temperature = 0.5;

  bool spectral_norm = true;
  double lipschitz_scale = 1.0;
  int power_iterations = 1;
  int eval_power_iterations = 50;

  EarlyStopConfig early_stop;
  std::uint64_t seed = 0;
  double split = 0.9;
  /// Reuse the critic-step fake batch for the generator step instead of drawing a fresh one.
  bool reuse_fake = false;
  /// Record elapsed seconds in the history; 0 otherwise so histories are reproducible.
  bool record_wall_clock = false;

  int latent_dim = 8;
  std::vector<int> generator_hidden;
  Activation generator_activation = Activation::Swish;
  std::vector<int> critic_hidden = {16, 16};
  Activation critic_activation = Activation::LeakyRelu;
  /// Categorical variables when non-empty; continuous data otherwise.
  std::vector<int> cardinalities;
  /// Generated rows used for validation diagnostics (0 = validation split size).
  int eval_samples = 0;

  void validate() const;
};

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);

struct GanState {
  Mlp generator;
  AdamState generator_adam;
  std::vector<Mlp> critics;
  std::vector<AdamState> critic_adams;
  FamilySpec families;
  std::vector<std::vector<int>> columns;
  std::optional<Encoding> encoding;
  long long step = 0;
  int epoch = 0;

  std::optional<double> best_metric;
  int best_epoch = -1;
  Mlp best_generator;
  std::vector<Mlp> best_critics;
};

struct EpochRecord {
  int epoch = 0;
  std::string split;  // "train" or "val"
  double objective = 0.0;
  double energy_distance = 0.0;
  double avg_loglik = 0.0;
  std::vector<double> auc;
  double seconds = 0.0;
};

struct RunHistory {
  std::vector<EpochRecord> records;
  bool aborted = false;
  std::string abort_reason;
  bool early_stopped = false;

  [[nodiscard]] std::vector<std::string> header(int critic_count) const;
  [[nodiscard]] std::string to_csv(int critic_count) const;
  void write_csv(const std::filesystem::path& path, int critic_count) const;
  /// Last validation record, if any.
  [[nodiscard]] const EpochRecord* last_validation() const;
};

/// Fresh generator and critics for a data dimension. For categorical runs
/// `data_dim` is the number of variables and the critics see encoded blocks.
GanState init_state(const TrainConfig& config, const Dag& dag, int data_dim);

/// Continuous: the generator output. Categorical: Gumbel-softmax relaxed
/// rows when `relaxed`, otherwise hard decoded codes (one column per variable).
SampleBatch generator_sample(const GanState& state, const TrainConfig& config, int count, std::uint64_t seed,
                             bool relaxed = false);

/// One simultaneous step: ascent on every critic and descent on the
/// generator, both gradients taken at the pre-update parameters. Returns
/// the objective of the critic step. `real_batch` is encoded for categorical runs.
double train_step(GanState& state, const TrainConfig& config, const Matrix& real_batch);

struct TrainResult {
  GanState state;
  RunHistory history;
  /// Rows of the input data held out for validation.
  std::vector<int> validation_rows;
};

/// Validation record for the current state: objective, energy distance,
/// ground-truth log-likelihood (when `discrete` is given) and per-critic AUC
/// against hard generated samples drawn with `tag`. Critics are evaluated on
/// a copy with `eval_power_iterations` spectral refreshes.
EpochRecord validation_diagnostics(const GanState& state, const TrainConfig& config, const Matrix& val_encoded,
                                   std::uint64_t tag, const DiscreteBayesNet* discrete);

/// Full loop with per-epoch validation diagnostics. NonFiniteObjective ends
/// the run with `history.aborted` set; the partial history is returned.
TrainResult train(const TrainConfig& config, const SampleBatch& data, const Dag& dag,
                  const AnyNet* net_for_diagnostics = nullptr);

/// Configuration, families, epoch and every network of a state as one JSON document.
std::string checkpoint_to_json(const GanState& state, const TrainConfig& config);

/// Critic scores of a batch (encoded for categorical runs), one column per critic.
Matrix critic_scores(const GanState& state, const Matrix& batch);

}  // namespace gigan
