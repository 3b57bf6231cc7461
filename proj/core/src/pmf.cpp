#include "gigan/pmf.hpp"

#include <algorithm>
#include <cmath>

#include "gigan/errors.hpp"

namespace gigan {

long long grid_size(std::span<const int> cardinalities, long long limit) {
  long long total = 1;
  for (int k : cardinalities) {
    if (k <= 0) throw ShapeMismatch("grid_size: cardinalities must be positive");
    total *= k;
    if (total > limit) {
      throw StateSpaceTooLarge("state space exceeds " + std::to_string(limit) + " points");
    }
  }
  return total;
}

FinitePmf::FinitePmf(std::vector<int> variables, std::vector<int> cardinalities,
                     Eigen::VectorXd probs)
    : variables_(std::move(variables)), cards_(std::move(cardinalities)), probs_(std::move(probs)) {
  if (variables_.size() != cards_.size()) throw ShapeMismatch("FinitePmf: variables/cardinalities");
  for (std::size_t k = 1; k < variables_.size(); ++k) {
    if (variables_[k] <= variables_[k - 1]) throw ShapeMismatch("FinitePmf: variables not ascending");
  }
  if (grid_size(cards_) != probs_.size()) throw ShapeMismatch("FinitePmf: probs size");
  if ((probs_.array() < 0.0).any()) throw DomainError("FinitePmf: negative probability");
  if (std::abs(probs_.sum() - 1.0) > 1e-10) throw DomainError("FinitePmf: probs do not sum to 1");
}

FinitePmf FinitePmf::uniform(std::vector<int> variables, std::vector<int> cardinalities) {
  const auto n = grid_size(cardinalities);
  return FinitePmf(std::move(variables), std::move(cardinalities),
                   Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

FinitePmf FinitePmf::dirac(std::vector<int> variables, std::vector<int> cardinalities, int at) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(grid_size(cardinalities));
  p[at] = 1.0;
  return FinitePmf(std::move(variables), std::move(cardinalities), std::move(p));
}

std::vector<int> FinitePmf::point(int index) const {
  std::vector<int> codes(cards_.size());
  for (int k = static_cast<int>(cards_.size()) - 1; k >= 0; --k) {
    codes[k] = index % cards_[k];
    index /= cards_[k];
  }
  return codes;
}

int FinitePmf::index_of(std::span<const int> codes) const {
  if (codes.size() != cards_.size()) throw ShapeMismatch("FinitePmf::index_of: arity");
  int index = 0;
  for (std::size_t k = 0; k < cards_.size(); ++k) {
    if (codes[k] < 0 || codes[k] >= cards_[k]) throw InvalidAssignment("code out of range");
    index = index * cards_[k] + codes[k];
  }
  return index;
}

FinitePmf FinitePmf::with_probs(Eigen::VectorXd probs) const {
  FinitePmf out;
  out.variables_ = variables_;
  out.cards_ = cards_;
  if (probs.size() != probs_.size()) throw ShapeMismatch("FinitePmf::with_probs: size");
  out.probs_ = std::move(probs);
  return out;
}

bool FinitePmf::same_grid(const FinitePmf& other) const noexcept {
  return variables_ == other.variables_ && cards_ == other.cards_;
}

std::vector<int> projection_index(const FinitePmf& pmf, std::span<const int> keep) {
  const auto& vars = pmf.variables();
  std::vector<int> positions;
  for (int v : keep) {
    auto it = std::find(vars.begin(), vars.end(), v);
    if (it == vars.end()) throw ShapeMismatch("projection: variable not in pmf");
    positions.push_back(static_cast<int>(it - vars.begin()));
  }
  std::sort(positions.begin(), positions.end());
  std::vector<int> out(pmf.size());
  for (int x = 0; x < pmf.size(); ++x) {
    auto codes = pmf.point(x);
    int index = 0;
    for (int pos : positions) index = index * pmf.cardinalities()[pos] + codes[pos];
    out[x] = index;
  }
  return out;
}

FinitePmf marginalize(const FinitePmf& pmf, std::span<const int> keep) {
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  std::vector<int> cards;
  for (int v : kept) {
    auto it = std::find(pmf.variables().begin(), pmf.variables().end(), v);
    if (it == pmf.variables().end()) throw ShapeMismatch("marginalize: variable not in pmf");
    cards.push_back(pmf.cardinalities()[it - pmf.variables().begin()]);
  }
  auto proj = projection_index(pmf, kept);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(grid_size(cards));
  for (int x = 0; x < pmf.size(); ++x) p[proj[x]] += pmf[x];
  FinitePmf out = FinitePmf::uniform(kept, cards);
  return out.with_probs(std::move(p));
}

namespace {

FiniteMetric coordinate_metric(std::span<const int> cards, bool hamming) {
  const auto n = grid_size(cards);
  std::vector<int> vars(cards.size());
  for (std::size_t k = 0; k < vars.size(); ++k) vars[k] = static_cast<int>(k);
  FinitePmf grid = FinitePmf::uniform(vars, {cards.begin(), cards.end()});
  std::vector<std::vector<int>> pts(n);
  for (int x = 0; x < n; ++x) pts[x] = grid.point(x);
  FiniteMetric m{Eigen::MatrixXd::Zero(n, n)};
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      double s = 0.0;
      for (std::size_t k = 0; k < cards.size(); ++k) {
        int diff = std::abs(pts[x][k] - pts[y][k]);
        s += hamming ? (diff != 0 ? 1.0 : 0.0) : diff;
      }
      m.d(x, y) = s;
    }
  }
  return m;
}

}  // namespace

FiniteMetric FiniteMetric::l1(std::span<const int> cardinalities) {
  return coordinate_metric(cardinalities, false);
}

FiniteMetric FiniteMetric::hamming(std::span<const int> cardinalities) {
  return coordinate_metric(cardinalities, true);
}

FiniteMetric FiniteMetric::discrete(int size, double c) {
  FiniteMetric m{Eigen::MatrixXd::Constant(size, size, c)};
  m.d.diagonal().setZero();
  return m;
}

void FiniteMetric::validate(double tol) const {
  const int n = size();
  if (d.cols() != n) throw DomainError("FiniteMetric: not square");
  for (int x = 0; x < n; ++x) {
    if (std::abs(d(x, x)) > tol) throw DomainError("FiniteMetric: nonzero diagonal");
    for (int y = 0; y < n; ++y) {
      if (d(x, y) < -tol) throw DomainError("FiniteMetric: negative distance");
      if (std::abs(d(x, y) - d(y, x)) > tol) throw DomainError("FiniteMetric: not symmetric");
      for (int z = 0; z < n; ++z) {
        if (d(x, z) > d(x, y) + d(y, z) + tol) throw DomainError("FiniteMetric: triangle inequality");
      }
    }
  }
}

}  // namespace gigan
