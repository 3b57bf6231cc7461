#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace gigan {

/// Probability mass function on a finite product grid.
///
/// Points are all code tuples over `cardinalities`, enumerated
/// lexicographically with the last variable varying fastest. `variables`
/// holds the variable id of each coordinate (ascending).
class FinitePmf {
 public:
  FinitePmf() = default;
  FinitePmf(std::vector<int> variables, std::vector<int> cardinalities, Eigen::VectorXd probs);

  static FinitePmf uniform(std::vector<int> variables, std::vector<int> cardinalities);
  /// Point mass at flat index `at`.
  static FinitePmf dirac(std::vector<int> variables, std::vector<int> cardinalities, int at);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(probs_.size()); }
  [[nodiscard]] const std::vector<int>& variables() const noexcept { return variables_; }
  [[nodiscard]] const std::vector<int>& cardinalities() const noexcept { return cards_; }
  [[nodiscard]] const Eigen::VectorXd& probs() const noexcept { return probs_; }
  [[nodiscard]] double operator[](int index) const { return probs_[index]; }

  [[nodiscard]] std::vector<int> point(int index) const;
  [[nodiscard]] int index_of(std::span<const int> codes) const;
  /// Same grid, new probabilities (renormalization is the caller's job).
  [[nodiscard]] FinitePmf with_probs(Eigen::VectorXd probs) const;
  [[nodiscard]] bool same_grid(const FinitePmf& other) const noexcept;

 private:
  std::vector<int> variables_;
  std::vector<int> cards_;
  Eigen::VectorXd probs_;
};

/// Number of points of a product grid; throws StateSpaceTooLarge above `limit`.
long long grid_size(std::span<const int> cardinalities, long long limit = 1000000);

/// Exact marginal on the variable ids in `keep` (output ordered by variable id).
FinitePmf marginalize(const FinitePmf& pmf, std::span<const int> keep);

/// Flat index map: for each point of `pmf`'s grid, the index of its
/// projection onto the kept coordinates (`keep` are variable ids).
std::vector<int> projection_index(const FinitePmf& pmf, std::span<const int> keep);

/// Pairwise distances over the points of one grid.
struct FiniteMetric {
  Eigen::MatrixXd d;

  /// Sum of |a_v - b_v| over integer codes.
  static FiniteMetric l1(std::span<const int> cardinalities);
  /// Number of differing coordinates.
  static FiniteMetric hamming(std::span<const int> cardinalities);
  /// c * 1{x != y}.
  static FiniteMetric discrete(int size, double c);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(d.rows()); }
  /// Throws DomainError unless symmetric, zero-diagonal, nonnegative and
  /// triangle-consistent within `tol`.
  void validate(double tol = 1e-9) const;
};

}  // namespace gigan
