#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gigan/graph.hpp"
#include "gigan/pmf.hpp"
#include "gigan/types.hpp"

namespace gigan {

/// Samples as rows. Categorical cells hold integer codes stored as doubles.
struct SampleBatch {
  Matrix data;
  std::vector<int> column_schema;  // variable id of each column

  [[nodiscard]] int rows() const noexcept { return static_cast<int>(data.rows()); }
  [[nodiscard]] int cols() const noexcept { return static_cast<int>(data.cols()); }
  /// Rows selected by index, same schema.
  [[nodiscard]] SampleBatch take_rows(std::span<const int> indices) const;
  [[nodiscard]] SampleBatch head(int count) const;
};

SampleBatch identity_schema_batch(Matrix data);

/// Contiguous one-hot blocks, one per variable in node order.
struct Encoding {
  std::vector<int> offsets;
  std::vector<int> widths;
  int total_dim = 0;

  static Encoding from_cardinalities(std::span<const int> cardinalities);
  [[nodiscard]] int variable_count() const noexcept { return static_cast<int>(widths.size()); }
  /// Encoded family: the union of the blocks of the listed variables.
  [[nodiscard]] std::vector<int> columns(std::span<const int> variables) const;
};

/// Categorical Bayesian network. The CPT of node i is a matrix with one row
/// per configuration of its declared parents (lexicographic, last parent
/// fastest) and k_i columns.
class DiscreteBayesNet {
 public:
  DiscreteBayesNet() = default;
  /// Parents are taken in ascending index order.
  DiscreteBayesNet(Dag dag, std::vector<int> cardinalities, std::vector<Matrix> cpts);
  /// Explicit declared parent order per node (each a permutation of Pa(i)).
  DiscreteBayesNet(Dag dag, std::vector<int> cardinalities, std::vector<Matrix> cpts,
                   std::vector<std::vector<int>> parent_order);

  [[nodiscard]] const Dag& dag() const noexcept { return dag_; }
  [[nodiscard]] int node_count() const noexcept { return dag_.node_count(); }
  [[nodiscard]] const std::vector<int>& cardinalities() const noexcept { return cards_; }
  [[nodiscard]] const Matrix& cpt(int node) const { return cpts_.at(node); }
  [[nodiscard]] const std::vector<int>& parent_order(int node) const { return order_.at(node); }
  [[nodiscard]] int parent_row(int node, std::span<const int> assignment) const;
  [[nodiscard]] double probability(int node, std::span<const int> assignment) const;
  [[nodiscard]] long long parameter_count() const noexcept;

 private:
  void validate() const;

  Dag dag_;
  std::vector<int> cards_;
  std::vector<Matrix> cpts_;
  std::vector<std::vector<int>> order_;
};

/// X_i = sum_j phi(j, i) X_j + noise_std_i * eps_i for non-roots and
/// X_r = root_mean_r + root_std_r * eps_r for roots.
class LinearGaussianNet {
 public:
  LinearGaussianNet() = default;
  LinearGaussianNet(Dag dag, Eigen::MatrixXd phi, Vector noise_std, Vector root_mean, Vector root_std);

  [[nodiscard]] const Dag& dag() const noexcept { return dag_; }
  [[nodiscard]] int node_count() const noexcept { return dag_.node_count(); }
  [[nodiscard]] const Eigen::MatrixXd& phi() const noexcept { return phi_; }
  [[nodiscard]] double coeff(int parent, int child) const { return phi_(parent, child); }
  [[nodiscard]] const Vector& noise_std() const noexcept { return noise_; }
  [[nodiscard]] const Vector& root_mean() const noexcept { return root_mean_; }
  [[nodiscard]] const Vector& root_std() const noexcept { return root_std_; }
  /// Standard deviation of the exogenous term of a node.
  [[nodiscard]] double exogenous_std(int node) const;

  [[nodiscard]] Vector mean() const;
  /// (I - B)^{-1} D (I - B)^{-T} with B(i, j) = phi(j, i).
  [[nodiscard]] Eigen::MatrixXd covariance() const;

 private:
  Dag dag_;
  Eigen::MatrixXd phi_;
  Vector noise_;
  Vector root_mean_;
  Vector root_std_;
};

/// y_t = v0 t - g t^2 / 2 observed at t_j = j / m, j = 0..m.
struct BallModel {
  double mu_v = 4.0;
  double sigma_v = 3.0;
  double g = 9.8;
  int m_plus_1 = 15;

  void validate() const;
  [[nodiscard]] std::vector<double> times() const;
};

/// y_{t_j} has parents y_{t_{j-1}} and y_{t_{j-2}} (truncated at j = 0, 1).
Dag ball_dag(int m_plus_1);

/// One row per draw, columns in node order; one uniform (categorical) or one
/// normal (Gaussian) per (row, node) in topological order.
SampleBatch ancestral_sample(const DiscreteBayesNet& net, int count, std::uint64_t seed);
SampleBatch ancestral_sample(const LinearGaussianNet& net, int count, std::uint64_t seed);
SampleBatch ball_sample(const BallModel& model, int count, std::uint64_t seed);

/// Sum of log CPT entries; kLogZero when any entry is exactly 0.
double joint_logprob(const DiscreteBayesNet& net, std::span<const int> assignment);

/// Exact joint over all assignments (variables 0..n-1).
FinitePmf enumerate_joint(const DiscreteBayesNet& net);

/// Per-node exact marginals, each summed over the node's ancestral closure.
std::vector<Vector> exact_marginals(const DiscreteBayesNet& net);

std::pair<SampleBatch, Encoding> dummy_encode(const SampleBatch& batch,
                                              std::span<const int> cardinalities);
/// Argmax per block.
SampleBatch dummy_decode(const Matrix& encoded, const Encoding& encoding);

/// Every CPT row drawn from a symmetric Dirichlet(concentration).
DiscreteBayesNet random_cpts(const Dag& dag, std::vector<int> cardinalities, double concentration,
                             std::uint64_t seed);

/// Codes of one batch row as integers; throws InvalidAssignment on
/// non-integral or out-of-range cells.
std::vector<int> row_codes(const SampleBatch& batch, int row, std::span<const int> cardinalities);

}  // namespace gigan
