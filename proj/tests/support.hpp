#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "gigan/nn.hpp"
#include "gigan/rng.hpp"
#include "gigan/types.hpp"

namespace gigan::testing {

/// Central differences of a scalar function of a parameter vector.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    const double up = f(x);
    x[k] = keep - h;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// |a - b|_2 / max(|a|_2, |b|_2, floor).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-8) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

inline Matrix normal_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

inline Vector dirichlet(Rng& rng, int size, double shape = 1.0) {
  Vector v(size);
  for (int k = 0; k < size; ++k) v[k] = rng.gamma(shape);
  return v / v.sum();
}

/// Normal inputs whose hidden pre-activations all stay `margin` away from
/// the LeakyReLU kink, where central differences are meaningless.
inline Matrix smooth_inputs(const Mlp& net, int rows, Rng& rng, double margin = 1e-4) {
  Matrix x = normal_matrix(rows, net.spec().input_dim, rng);
  if (net.spec().hidden_activation != Activation::LeakyRelu) return x;
  for (int attempt = 0; attempt < 100; ++attempt) {
    ForwardCache cache;
    net.forward(x, &cache);
    bool clear = true;
    for (int l = 0; l + 1 < net.layer_count(); ++l) clear = clear && cache.pre[l].cwiseAbs().minCoeff() > margin;
    if (clear) break;
    x = normal_matrix(rows, net.spec().input_dim, rng);
  }
  return x;
}

}  // namespace gigan::testing
