#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gigan/bayesnet.hpp"
#include "gigan/rng.hpp"
#include "gigan/types.hpp"

namespace gigan {

enum class Activation { Identity, LeakyRelu, Swish };
enum class OutputActivation { Identity, JsDomain };

std::string to_string(Activation a);
std::string to_string(OutputActivation a);
Activation parse_activation(const std::string& name);
OutputActivation parse_output_activation(const std::string& name);

/// Lipschitz constant of swish (beta = 1): max_x d/dx [x sigmoid(x)].
inline constexpr double kSwishLipschitz = 1.0998393194;

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_widths;
  int output_dim = 1;
  Activation hidden_activation = Activation::LeakyRelu;
  double leaky_slope = 0.2;
  OutputActivation output_activation = OutputActivation::Identity;
  bool spectral_norm = false;
  /// Final constant multiplier L (the class Gamma^L = {L gamma}).
  double lipschitz_scale = 1.0;
  std::uint64_t init_seed = 0;

  void validate() const;
};

struct ForwardCache {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

/// Dense feed-forward network. All parameters live in one contiguous
/// buffer, layer by layer: weight (out x in, row-major) then bias (out).
/// Gradients use the same layout.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  [[nodiscard]] const MlpSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int layer_count() const noexcept { return static_cast<int>(shapes_.size()); }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }
  [[nodiscard]] std::span<double> params() noexcept { return params_; }
  [[nodiscard]] std::span<const double> params() const noexcept { return params_; }
  [[nodiscard]] int rows(int layer) const { return shapes_.at(layer).first; }
  [[nodiscard]] int cols(int layer) const { return shapes_.at(layer).second; }

  [[nodiscard]] Eigen::Map<Matrix> weight(int layer);
  [[nodiscard]] Eigen::Map<const Matrix> weight(int layer) const;
  [[nodiscard]] Eigen::Map<Vector> bias(int layer);
  [[nodiscard]] Eigen::Map<const Vector> bias(int layer) const;
  [[nodiscard]] std::size_t weight_offset(int layer) const { return offsets_.at(layer); }

  /// Cached spectral estimate used to normalize a layer (1 without spectral norm).
  [[nodiscard]] double sigma(int layer) const { return sigma_.at(layer); }
  [[nodiscard]] const Vector& power_u(int layer) const { return u_.at(layer); }
  [[nodiscard]] const Vector& power_v(int layer) const { return v_.at(layer); }
  void set_power_state(int layer, Vector u, Vector v, double sigma);
  /// Runs power iteration on every layer and updates the cached estimates.
  void refresh_spectral(int iterations);

  Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const;
  /// Accumulates parameter gradients into `param_grad` (skipped when empty)
  /// and returns the gradient with respect to the input. The spectral
  /// normalization factor is treated as a constant.
  Matrix backward(const ForwardCache& cache, const Matrix& output_grad, std::span<double> param_grad) const;

 private:
  MlpSpec spec_;
  std::vector<std::pair<int, int>> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::vector<Vector> u_;
  std::vector<Vector> v_;
  std::vector<double> sigma_;
};

double activate(Activation a, double x, double slope);
double activate_derivative(Activation a, double x, double slope);
double activation_lipschitz(Activation a, double slope);

struct SpectralResult {
  Matrix weight;  // W / sigma
  Vector u;
  Vector v;
  double sigma = 1.0;
};

/// Power iteration v <- W^T u / |.|, u <- W v / |.|; sigma = u^T W v.
SpectralResult spectral_normalize(const Matrix& weight, Vector u, Vector v, int iterations);

/// Product over layers of the exact top singular value of W_l / sigma_l,
/// times activation Lipschitz constants and the scale L. Bounds the
/// Lipschitz constant for both the l2 and l1 input norms.
double lipschitz_upper_bound(const Mlp& mlp);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t size, double learning_rate) : lr(learning_rate), m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected Adam descent step: params -= lr * mhat / (sqrt(vhat) + eps).
void adam_step(AdamState& adam, std::span<double> params, std::span<const double> grads);

/// Standard Gumbel noise, one draw per cell in row-major order.
Matrix gumbel_noise(int rows, int cols, Rng& rng);

/// Per block: softmax((logits + noise) / tau).
Matrix gumbel_softmax_frozen(const Matrix& logits, const Matrix& noise, const Encoding& blocks, double tau);

struct GumbelSample {
  Matrix relaxed;
  Matrix noise;
};

GumbelSample gumbel_softmax(const Matrix& logits, const Encoding& blocks, double tau, Rng& rng);
GumbelSample gumbel_softmax(const Matrix& logits, const Encoding& blocks, double tau, std::uint64_t seed);

/// Gradient with respect to the logits given the relaxed output and its gradient.
Matrix gumbel_softmax_backward(const Matrix& relaxed, const Matrix& relaxed_grad, const Encoding& blocks,
                               double tau);

/// Hard one-hot rows at argmax(logits + noise) per block.
Matrix gumbel_hard(const Matrix& logits, const Matrix& noise, const Encoding& blocks);

/// Checkpoint document: {"spec": {...}, "tensors": [{"name", "shape", "data"}],
/// "spectral": [{"u", "v", "sigma"}]}.
std::string mlp_to_json(const Mlp& mlp);
Mlp mlp_from_json(const std::string& text);

}  // namespace gigan
