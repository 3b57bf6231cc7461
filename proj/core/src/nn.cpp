#include "gigan/nn.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "gigan/errors.hpp"

namespace gigan {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Swish: return "swish";
  }
  return "identity";
}

std::string to_string(OutputActivation a) {
  return a == OutputActivation::JsDomain ? "js_domain" : "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "leaky_relu") return Activation::LeakyRelu;
  if (name == "swish") return Activation::Swish;
  throw ParseError("unknown activation '" + name + "'");
}

OutputActivation parse_output_activation(const std::string& name) {
  if (name == "identity") return OutputActivation::Identity;
  if (name == "js_domain") return OutputActivation::JsDomain;
  throw ParseError("unknown output activation '" + name + "'");
}

namespace {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double activate(Activation a, double x, double slope) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::LeakyRelu: return x >= 0 ? x : slope * x;
    case Activation::Swish: return x * sigmoid(x);
  }
  return x;
}

double activate_derivative(Activation a, double x, double slope) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::LeakyRelu: return x >= 0 ? 1.0 : slope;
    case Activation::Swish: {
      const double s = sigmoid(x);
      return s + x * s * (1.0 - s);
    }
  }
  return 1.0;
}

double activation_lipschitz(Activation a, double slope) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::LeakyRelu: return std::max(1.0, std::abs(slope));
    case Activation::Swish: return kSwishLipschitz;
  }
  return 1.0;
}

void MlpSpec::validate() const {
  if (input_dim <= 0 || output_dim <= 0) throw ShapeMismatch("MlpSpec: dimensions must be positive");
  for (int w : hidden_widths) {
    if (w <= 0) throw ShapeMismatch("MlpSpec: hidden widths must be positive");
  }
  if (hidden_activation == Activation::LeakyRelu && !(leaky_slope > 0.0 && leaky_slope < 1.0)) {
    throw DomainError("MlpSpec: leaky slope must lie in (0, 1)");
  }
  if (!(lipschitz_scale > 0.0)) throw DomainError("MlpSpec: lipschitz_scale must be positive");
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  int in = spec_.input_dim;
  std::vector<int> widths = spec_.hidden_widths;
  widths.push_back(spec_.output_dim);
  std::size_t total = 0;
  for (int out : widths) {
    shapes_.emplace_back(out, in);
    offsets_.push_back(total);
    total += static_cast<std::size_t>(out) * in + out;
    in = out;
  }
  params_.assign(total, 0.0);
  Rng rng(spec_.init_seed, 0x6d6c70ull);
  for (int l = 0; l < layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / cols(l));
    auto w = weight(l);
    for (int r = 0; r < rows(l); ++r) {
      for (int c = 0; c < cols(l); ++c) w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  Rng power(spec_.init_seed, 0x706f776572ull);
  for (int l = 0; l < layer_count(); ++l) {
    Vector u(rows(l));
    for (int r = 0; r < rows(l); ++r) u[r] = power.normal();
    u /= u.norm();
    u_.push_back(u);
    v_.push_back(Vector::Zero(cols(l)));
    sigma_.push_back(1.0);
  }
  if (spec_.spectral_norm) refresh_spectral(50);
}

Eigen::Map<Matrix> Mlp::weight(int layer) {
  return {params_.data() + offsets_.at(layer), rows(layer), cols(layer)};
}

Eigen::Map<const Matrix> Mlp::weight(int layer) const {
  return {params_.data() + offsets_.at(layer), rows(layer), cols(layer)};
}

Eigen::Map<Vector> Mlp::bias(int layer) {
  return {params_.data() + offsets_.at(layer) + static_cast<std::size_t>(rows(layer)) * cols(layer), rows(layer)};
}

Eigen::Map<const Vector> Mlp::bias(int layer) const {
  return {params_.data() + offsets_.at(layer) + static_cast<std::size_t>(rows(layer)) * cols(layer), rows(layer)};
}

void Mlp::set_power_state(int layer, Vector u, Vector v, double sigma) {
  if (u.size() != rows(layer) || v.size() != cols(layer)) throw ShapeMismatch("set_power_state: shapes");
  u_.at(layer) = std::move(u);
  v_.at(layer) = std::move(v);
  sigma_.at(layer) = sigma;
}

void Mlp::refresh_spectral(int iterations) {
  if (!spec_.spectral_norm) return;
  for (int l = 0; l < layer_count(); ++l) {
    auto res = spectral_normalize(weight(l), u_[l], v_[l], iterations);
    u_[l] = std::move(res.u);
    v_[l] = std::move(res.v);
    sigma_[l] = res.sigma;
  }
}

Matrix Mlp::forward(const Matrix& x, ForwardCache* cache) const {
  if (x.cols() != spec_.input_dim) {
    throw ShapeMismatch("Mlp::forward: expected " + std::to_string(spec_.input_dim) + " columns, got " +
                        std::to_string(x.cols()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix a = x;
  const int last = layer_count() - 1;
  for (int l = 0; l <= last; ++l) {
    Matrix z = a * weight(l).transpose();
    if (sigma_[l] != 1.0) z *= 1.0 / sigma_[l];
    z.rowwise() += bias(l).transpose();
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(z);
    }
    if (l < last) {
      const auto act = spec_.hidden_activation;
      const double slope = spec_.leaky_slope;
      a = z.unaryExpr([act, slope](double v) { return activate(act, v, slope); });
    } else {
      a = std::move(z);
    }
  }
  if (spec_.output_activation == OutputActivation::JsDomain) {
    a = a.unaryExpr([](double v) { return std::log(2.0) - softplus(-v); });
  }
  if (spec_.lipschitz_scale != 1.0) a *= spec_.lipschitz_scale;
  return a;
}

Matrix Mlp::backward(const ForwardCache& cache, const Matrix& output_grad, std::span<double> param_grad) const {
  const int last = layer_count() - 1;
  if (static_cast<int>(cache.pre.size()) != layer_count()) throw ShapeMismatch("Mlp::backward: stale cache");
  if (output_grad.rows() != cache.pre[last].rows() || output_grad.cols() != spec_.output_dim) {
    throw ShapeMismatch("Mlp::backward: output_grad shape");
  }
  if (!param_grad.empty() && param_grad.size() != params_.size()) {
    throw ShapeMismatch("Mlp::backward: param_grad size");
  }
  Matrix dz = output_grad * spec_.lipschitz_scale;
  if (spec_.output_activation == OutputActivation::JsDomain) {
    dz.array() *= cache.pre[last].unaryExpr([](double v) { return sigmoid(-v); }).array();
  }
  for (int l = last; l >= 0; --l) {
    const double inv = 1.0 / sigma_[l];
    if (!param_grad.empty()) {
      Eigen::Map<Matrix> gw(param_grad.data() + offsets_[l], rows(l), cols(l));
      Eigen::Map<Vector> gb(param_grad.data() + offsets_[l] + static_cast<std::size_t>(rows(l)) * cols(l), rows(l));
      gw.noalias() += inv * (dz.transpose() * cache.inputs[l]);
      gb += dz.colwise().sum().transpose();
    }
    Matrix da = (dz * weight(l)) * inv;
    if (l == 0) return da;
    const auto act = spec_.hidden_activation;
    const double slope = spec_.leaky_slope;
    dz = da.array() * cache.pre[l - 1].unaryExpr([act, slope](double v) {
                        return activate_derivative(act, v, slope);
                      }).array();
  }
  return {};
}

SpectralResult spectral_normalize(const Matrix& weight, Vector u, Vector v, int iterations) {
  if (iterations < 1) throw DomainError("spectral_normalize: iterations must be >= 1");
  if (u.size() != weight.rows()) throw ShapeMismatch("spectral_normalize: u size");
  if (u.norm() == 0.0) u = Vector::Ones(weight.rows());
  u /= u.norm();
  for (int it = 0; it < iterations; ++it) {
    v = weight.transpose() * u;
    const double nv = v.norm();
    if (nv == 0.0) break;
    v /= nv;
    u = weight * v;
    const double nu = u.norm();
    if (nu == 0.0) break;
    u /= nu;
  }
  SpectralResult res;
  res.sigma = (v.size() == weight.cols()) ? u.dot(weight * v) : 0.0;
  if (!(res.sigma > 0.0)) res.sigma = 1.0;
  res.weight = weight / res.sigma;
  res.u = std::move(u);
  res.v = std::move(v);
  return res;
}

double lipschitz_upper_bound(const Mlp& mlp) {
  const auto& spec = mlp.spec();
  if (!spec.spectral_norm) throw NotApplicable("lipschitz_upper_bound: spectral normalization is off");
  double bound = spec.lipschitz_scale;
  for (int l = 0; l < mlp.layer_count(); ++l) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(mlp.weight(l)) / mlp.sigma(l));
    bound *= svd.singularValues()[0];
    if (l + 1 < mlp.layer_count()) bound *= activation_lipschitz(spec.hidden_activation, spec.leaky_slope);
  }
  return bound;  // js_domain has derivative sigmoid(-v) <= 1
}

void adam_step(AdamState& adam, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || adam.m.size() != params.size() || adam.v.size() != params.size()) {
    throw ShapeMismatch("adam_step: size mismatch");
  }
  ++adam.step;
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    adam.m[k] = adam.beta1 * adam.m[k] + (1.0 - adam.beta1) * grads[k];
    adam.v[k] = adam.beta2 * adam.v[k] + (1.0 - adam.beta2) * grads[k] * grads[k];
    const double mhat = adam.m[k] / c1;
    const double vhat = adam.v[k] / c2;
    params[k] -= adam.lr * mhat / (std::sqrt(vhat) + adam.eps);
  }
}

Matrix gumbel_noise(int rows, int cols, Rng& rng) {
  Matrix g(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) g(r, c) = rng.gumbel();
  }
  return g;
}

Matrix gumbel_softmax_frozen(const Matrix& logits, const Matrix& noise, const Encoding& blocks, double tau) {
  if (!(tau > 0.0)) throw DomainError("gumbel_softmax: temperature must be positive");
  if (logits.cols() != blocks.total_dim || noise.rows() != logits.rows() || noise.cols() != logits.cols()) {
    throw ShapeMismatch("gumbel_softmax: shape mismatch");
  }
  Matrix y(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (int b = 0; b < blocks.variable_count(); ++b) {
      const int off = blocks.offsets[b];
      const int w = blocks.widths[b];
      Eigen::RowVectorXd z = (logits.row(r).segment(off, w) + noise.row(r).segment(off, w)) / tau;
      const double mx = z.maxCoeff();
      Eigen::RowVectorXd e = (z.array() - mx).exp();
      y.row(r).segment(off, w) = e / e.sum();
    }
  }
  return y;
}

GumbelSample gumbel_softmax(const Matrix& logits, const Encoding& blocks, double tau, Rng& rng) {
  GumbelSample s;
  s.noise = gumbel_noise(static_cast<int>(logits.rows()), static_cast<int>(logits.cols()), rng);
  s.relaxed = gumbel_softmax_frozen(logits, s.noise, blocks, tau);
  return s;
}

GumbelSample gumbel_softmax(const Matrix& logits, const Encoding& blocks, double tau, std::uint64_t seed) {
  Rng rng(seed, 0x67756d62656cull);
  return gumbel_softmax(logits, blocks, tau, rng);
}

Matrix gumbel_softmax_backward(const Matrix& relaxed, const Matrix& relaxed_grad, const Encoding& blocks,
                               double tau) {
  Matrix g(relaxed.rows(), relaxed.cols());
  for (Eigen::Index r = 0; r < relaxed.rows(); ++r) {
    for (int b = 0; b < blocks.variable_count(); ++b) {
      const int off = blocks.offsets[b];
      const int w = blocks.widths[b];
      auto y = relaxed.row(r).segment(off, w);
      auto dy = relaxed_grad.row(r).segment(off, w);
      const double inner = y.dot(dy);
      g.row(r).segment(off, w) = (y.array() * (dy.array() - inner) / tau).matrix();
    }
  }
  return g;
}

Matrix gumbel_hard(const Matrix& logits, const Matrix& noise, const Encoding& blocks) {
  Matrix y = Matrix::Zero(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (int b = 0; b < blocks.variable_count(); ++b) {
      Eigen::Index best;
      (logits.row(r).segment(blocks.offsets[b], blocks.widths[b]) +
       noise.row(r).segment(blocks.offsets[b], blocks.widths[b]))
          .maxCoeff(&best);
      y(r, blocks.offsets[b] + best) = 1.0;
    }
  }
  return y;
}

std::string mlp_to_json(const Mlp& mlp) {
  using nlohmann::json;
  const auto& s = mlp.spec();
  json spec{{"input_dim", s.input_dim},
            {"hidden_widths", s.hidden_widths},
            {"output_dim", s.output_dim},
            {"hidden_activation", to_string(s.hidden_activation)},
            {"leaky_slope", s.leaky_slope},
            {"output_activation", to_string(s.output_activation)},
            {"spectral_norm", s.spectral_norm},
            {"lipschitz_scale", s.lipschitz_scale},
            {"init_seed", s.init_seed}};
  json tensors = json::array();
  json spectral = json::array();
  for (int l = 0; l < mlp.layer_count(); ++l) {
    auto w = mlp.weight(l);
    auto b = mlp.bias(l);
    tensors.push_back({{"name", "layer" + std::to_string(l) + ".weight"},
                       {"shape", {mlp.rows(l), mlp.cols(l)}},
                       {"data", std::vector<double>(w.data(), w.data() + w.size())}});
    tensors.push_back({{"name", "layer" + std::to_string(l) + ".bias"},
                       {"shape", {mlp.rows(l)}},
                       {"data", std::vector<double>(b.data(), b.data() + b.size())}});
    const auto& u = mlp.power_u(l);
    const auto& v = mlp.power_v(l);
    spectral.push_back({{"u", std::vector<double>(u.data(), u.data() + u.size())},
                        {"v", std::vector<double>(v.data(), v.data() + v.size())},
                        {"sigma", mlp.sigma(l)}});
  }
  return json{{"spec", spec}, {"tensors", tensors}, {"spectral", spectral}}.dump();
}

Mlp mlp_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    json doc = json::parse(text);
    const auto& js = doc.at("spec");
    MlpSpec s;
    s.input_dim = js.at("input_dim");
    s.hidden_widths = js.at("hidden_widths").get<std::vector<int>>();
    s.output_dim = js.at("output_dim");
    s.hidden_activation = parse_activation(js.at("hidden_activation"));
    s.leaky_slope = js.at("leaky_slope");
    s.output_activation = parse_output_activation(js.at("output_activation"));
    s.spectral_norm = js.at("spectral_norm");
    s.lipschitz_scale = js.at("lipschitz_scale");
    s.init_seed = js.at("init_seed");
    Mlp mlp(s);
    const auto& tensors = doc.at("tensors");
    if (tensors.size() != static_cast<std::size_t>(2 * mlp.layer_count())) {
      throw ParseError("checkpoint: tensor count mismatch");
    }
    for (int l = 0; l < mlp.layer_count(); ++l) {
      auto w = tensors[2 * l].at("data").get<std::vector<double>>();
      auto b = tensors[2 * l + 1].at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != mlp.weight(l).size() ||
          static_cast<Eigen::Index>(b.size()) != mlp.bias(l).size()) {
        throw ParseError("checkpoint: tensor shape mismatch");
      }
      std::copy(w.begin(), w.end(), mlp.weight(l).data());
      std::copy(b.begin(), b.end(), mlp.bias(l).data());
      if (doc.contains("spectral")) {
        const auto& sp = doc["spectral"].at(l);
        auto u = sp.at("u").get<std::vector<double>>();
        auto v = sp.at("v").get<std::vector<double>>();
        mlp.set_power_state(l, Eigen::Map<Vector>(u.data(), static_cast<Eigen::Index>(u.size())),
                            Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size())),
                            sp.at("sigma").get<double>());
      }
    }
    return mlp;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace gigan
