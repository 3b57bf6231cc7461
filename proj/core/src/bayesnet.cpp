#include "gigan/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gigan/errors.hpp"
#include "gigan/rng.hpp"

namespace gigan {

Matrix slice_columns(const Matrix& m, const std::vector<int>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] < 0 || cols[c] >= m.cols()) throw ShapeMismatch("slice_columns: column out of range");
    out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
  }
  return out;
}

Matrix slice_rows(const Matrix& m, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= m.rows()) throw ShapeMismatch("slice_rows: row out of range");
    out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  }
  return out;
}

SampleBatch SampleBatch::take_rows(std::span<const int> indices) const {
  SampleBatch out{Matrix(static_cast<Eigen::Index>(indices.size()), data.cols()), column_schema};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.data.row(static_cast<Eigen::Index>(r)) = data.row(indices[r]);
  }
  return out;
}

SampleBatch SampleBatch::head(int count) const {
  count = std::min(count, rows());
  return SampleBatch{data.topRows(count), column_schema};
}

SampleBatch identity_schema_batch(Matrix data) {
  std::vector<int> schema(data.cols());
  std::iota(schema.begin(), schema.end(), 0);
  return SampleBatch{std::move(data), std::move(schema)};
}

Encoding Encoding::from_cardinalities(std::span<const int> cardinalities) {
  Encoding e;
  for (int k : cardinalities) {
    if (k <= 0) throw ShapeMismatch("Encoding: cardinalities must be positive");
    e.offsets.push_back(e.total_dim);
    e.widths.push_back(k);
    e.total_dim += k;
  }
  return e;
}

std::vector<int> Encoding::columns(std::span<const int> variables) const {
  std::vector<int> cols;
  for (int v : variables) {
    for (int c = 0; c < widths.at(v); ++c) cols.push_back(offsets[v] + c);
  }
  return cols;
}

// ---------------------------------------------------------------------------

DiscreteBayesNet::DiscreteBayesNet(Dag dag, std::vector<int> cardinalities, std::vector<Matrix> cpts)
    : dag_(std::move(dag)), cards_(std::move(cardinalities)), cpts_(std::move(cpts)) {
  for (int i = 0; i < dag_.node_count(); ++i) order_.push_back(dag_.parents(i));
  validate();
}

DiscreteBayesNet::DiscreteBayesNet(Dag dag, std::vector<int> cardinalities, std::vector<Matrix> cpts,
                                   std::vector<std::vector<int>> parent_order)
    : dag_(std::move(dag)),
      cards_(std::move(cardinalities)),
      cpts_(std::move(cpts)),
      order_(std::move(parent_order)) {
  validate();
}

void DiscreteBayesNet::validate() const {
  const int n = dag_.node_count();
  if (static_cast<int>(cards_.size()) != n || static_cast<int>(cpts_.size()) != n ||
      static_cast<int>(order_.size()) != n) {
    throw InvalidNetwork("DiscreteBayesNet: per-node arrays must have node_count entries");
  }
  for (int i = 0; i < n; ++i) {
    if (cards_[i] < 1) throw InvalidNetwork("DiscreteBayesNet: cardinality must be positive");
    auto sorted = order_[i];
    std::sort(sorted.begin(), sorted.end());
    if (sorted != dag_.parents(i)) {
      throw InvalidNetwork("DiscreteBayesNet: parent order of node " + dag_.name(i) +
                           " is not a permutation of its parents");
    }
  }
  for (int i = 0; i < n; ++i) {
    long long rows = 1;
    for (int p : order_[i]) rows *= cards_[p];
    const Matrix& t = cpts_[i];
    if (t.rows() != rows || t.cols() != cards_[i]) {
      throw InvalidNetwork("DiscreteBayesNet: CPT of node " + dag_.name(i) + " has shape " +
                           std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cards_[i]));
    }
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      if ((t.row(r).array() < 0.0).any() || !t.row(r).allFinite()) {
        throw InvalidNetwork("DiscreteBayesNet: negative or non-finite CPT entry at node " + dag_.name(i));
      }
      if (std::abs(t.row(r).sum() - 1.0) > 1e-12) {
        throw InvalidNetwork("DiscreteBayesNet: CPT row does not sum to 1 at node " + dag_.name(i));
      }
    }
  }
}

int DiscreteBayesNet::parent_row(int node, std::span<const int> assignment) const {
  int row = 0;
  for (int p : order_.at(node)) row = row * cards_[p] + assignment[p];
  return row;
}

double DiscreteBayesNet::probability(int node, std::span<const int> assignment) const {
  return cpts_[node](parent_row(node, assignment), assignment[node]);
}

long long DiscreteBayesNet::parameter_count() const noexcept {
  long long total = 0;
  for (int i = 0; i < node_count(); ++i) total += cpts_[i].rows() * (cards_[i] - 1);
  return total;
}

// ---------------------------------------------------------------------------

LinearGaussianNet::LinearGaussianNet(Dag dag, Eigen::MatrixXd phi, Vector noise_std, Vector root_mean,
                                     Vector root_std)
    : dag_(std::move(dag)),
      phi_(std::move(phi)),
      noise_(std::move(noise_std)),
      root_mean_(std::move(root_mean)),
      root_std_(std::move(root_std)) {
  const int n = dag_.node_count();
  if (phi_.rows() != n || phi_.cols() != n || noise_.size() != n || root_mean_.size() != n ||
      root_std_.size() != n) {
    throw InvalidNetwork("LinearGaussianNet: parameter shapes must match node_count");
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(phi_(j, i))) throw InvalidNetwork("LinearGaussianNet: non-finite coefficient");
      if (phi_(j, i) != 0.0 && !dag_.has_edge(j, i)) {
        throw InvalidNetwork("LinearGaussianNet: coefficient on a non-edge " + std::to_string(j) + "->" +
                             std::to_string(i));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!(noise_[i] >= 0.0) || !(root_std_[i] >= 0.0) || !std::isfinite(root_mean_[i])) {
      throw InvalidNetwork("LinearGaussianNet: standard deviations must be finite and nonnegative");
    }
  }
}

double LinearGaussianNet::exogenous_std(int node) const {
  return dag_.is_root(node) ? root_std_[node] : noise_[node];
}

Vector LinearGaussianNet::mean() const {
  const int n = node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - phi_.transpose();
  Vector m = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (dag_.is_root(i)) m[i] = root_mean_[i];
  }
  return a.partialPivLu().solve(m);
}

Eigen::MatrixXd LinearGaussianNet::covariance() const {
  const int n = node_count();
  Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(n, n) - phi_.transpose()).inverse();
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = exogenous_std(i) * exogenous_std(i);
  return a * d.asDiagonal() * a.transpose();
}

// ---------------------------------------------------------------------------

void BallModel::validate() const {
  if (!(sigma_v >= 0.0)) throw InvalidNetwork("BallModel: sigma_v must be nonnegative");
  if (!(g > 0.0)) throw InvalidNetwork("BallModel: g must be positive");
  if (m_plus_1 < 3) throw InvalidNetwork("BallModel: at least 3 time points required");
}

std::vector<double> BallModel::times() const {
  std::vector<double> t(m_plus_1);
  const double m = m_plus_1 - 1;
  for (int j = 0; j < m_plus_1; ++j) t[j] = j / m;
  return t;
}

Dag ball_dag(int m_plus_1) {
  if (m_plus_1 < 3) throw InvalidGraph("ball_dag: at least 3 time points required");
  std::vector<Edge> edges;
  std::vector<std::string> names;
  for (int j = 0; j < m_plus_1; ++j) {
    names.push_back("y" + std::to_string(j));
    if (j >= 1) edges.emplace_back(j - 1, j);
    if (j >= 2) edges.emplace_back(j - 2, j);
  }
  return Dag(m_plus_1, std::move(edges), std::move(names));
}

// ---------------------------------------------------------------------------

SampleBatch ancestral_sample(const DiscreteBayesNet& net, int count, std::uint64_t seed) {
  if (count < 1) throw ShapeMismatch("ancestral_sample: count must be positive");
  const int n = net.node_count();
  Rng rng(seed, 0);
  Matrix data(count, n);
  std::vector<int> x(n);
  for (int r = 0; r < count; ++r) {
    for (int i : net.dag().topological_order()) {
      const Matrix& t = net.cpt(i);
      const int row = net.parent_row(i, x);
      const double u = rng.uniform();
      const int k = net.cardinalities()[i];
      double acc = 0.0;
      int code = k - 1;
      for (int c = 0; c < k; ++c) {
        acc += t(row, c);
        if (u < acc) {
          code = c;
          break;
        }
      }
      // Guard against rounding placing u above the cumulative sum of a row
      // whose tail entries are zero.
      while (t(row, code) == 0.0 && code > 0) --code;
      x[i] = code;
    }
    for (int i = 0; i < n; ++i) data(r, i) = x[i];
  }
  return identity_schema_batch(std::move(data));
}

SampleBatch ancestral_sample(const LinearGaussianNet& net, int count, std::uint64_t seed) {
  if (count < 1) throw ShapeMismatch("ancestral_sample: count must be positive");
  const int n = net.node_count();
  Rng rng(seed, 0);
  Matrix data(count, n);
  for (int r = 0; r < count; ++r) {
    for (int i : net.dag().topological_order()) {
      const double z = rng.normal();
      double v;
      if (net.dag().is_root(i)) {
        v = net.root_mean()[i] + net.root_std()[i] * z;
      } else {
        v = net.noise_std()[i] * z;
        for (int p : net.dag().parents(i)) v += net.coeff(p, i) * data(r, p);
      }
      data(r, i) = v;
    }
  }
  return identity_schema_batch(std::move(data));
}

SampleBatch ball_sample(const BallModel& model, int count, std::uint64_t seed) {
  model.validate();
  if (count < 1) throw ShapeMismatch("ball_sample: count must be positive");
  Rng rng(seed, 0);
  const auto t = model.times();
  Matrix data(count, model.m_plus_1);
  for (int r = 0; r < count; ++r) {
    const double v0 = model.mu_v + model.sigma_v * rng.normal();
    for (int j = 0; j < model.m_plus_1; ++j) data(r, j) = v0 * t[j] - 0.5 * model.g * t[j] * t[j];
  }
  return identity_schema_batch(std::move(data));
}

double joint_logprob(const DiscreteBayesNet& net, std::span<const int> assignment) {
  const int n = net.node_count();
  if (static_cast<int>(assignment.size()) != n) throw InvalidAssignment("joint_logprob: wrong length");
  for (int i = 0; i < n; ++i) {
    if (assignment[i] < 0 || assignment[i] >= net.cardinalities()[i]) {
      throw InvalidAssignment("joint_logprob: code out of range at node " + net.dag().name(i));
    }
  }
  double lp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = net.probability(i, assignment);
    if (p == 0.0) return kLogZero;
    lp += std::log(p);
  }
  return lp;
}

FinitePmf enumerate_joint(const DiscreteBayesNet& net) {
  const int n = net.node_count();
  const auto size = grid_size(net.cardinalities());
  std::vector<int> vars(n);
  std::iota(vars.begin(), vars.end(), 0);
  FinitePmf grid = FinitePmf::uniform(vars, net.cardinalities());
  Vector p(size);
  std::vector<int> x(n, 0);
  for (long long idx = 0; idx < size; ++idx) {
    double prob = 1.0;
    for (int i = 0; i < n && prob != 0.0; ++i) prob *= net.probability(i, x);
    p[idx] = prob;
    for (int k = n - 1; k >= 0; --k) {
      if (++x[k] < net.cardinalities()[k]) break;
      x[k] = 0;
    }
  }
  p /= p.sum();
  return grid.with_probs(std::move(p));
}

std::vector<Vector> exact_marginals(const DiscreteBayesNet& net) {
  // The ancestral closure of a node carries its own factorization, so each
  // marginal is a sum over that closure only.
  const int n = net.node_count();
  const auto& cards = net.cardinalities();
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i) {
    std::vector<int> closure = net.dag().ancestors(i);
    closure.push_back(i);
    std::vector<int> closure_cards;
    for (int v : closure) closure_cards.push_back(cards[v]);
    const auto size = grid_size(closure_cards);
    Vector m = Vector::Zero(cards[i]);
    std::vector<int> x(n, 0);
    for (long long idx = 0; idx < size; ++idx) {
      double prob = 1.0;
      for (std::size_t k = 0; k < closure.size() && prob != 0.0; ++k) prob *= net.probability(closure[k], x);
      m[x[i]] += prob;
      for (int k = static_cast<int>(closure.size()) - 1; k >= 0; --k) {
        if (++x[closure[k]] < cards[closure[k]]) break;
        x[closure[k]] = 0;
      }
    }
    out.push_back(m / m.sum());
  }
  return out;
}

std::vector<int> row_codes(const SampleBatch& batch, int row, std::span<const int> cardinalities) {
  std::vector<int> codes(batch.cols());
  for (int c = 0; c < batch.cols(); ++c) {
    const double v = batch.data(row, c);
    const int var = batch.column_schema.empty() ? c : batch.column_schema[c];
    const int code = static_cast<int>(std::lround(v));
    if (std::abs(v - code) > 1e-9 || code < 0 || code >= cardinalities[var]) {
      throw InvalidAssignment("categorical cell is not a valid code");
    }
    codes[c] = code;
  }
  return codes;
}

std::pair<SampleBatch, Encoding> dummy_encode(const SampleBatch& batch, std::span<const int> cardinalities) {
  std::vector<int> col_cards;
  for (int c = 0; c < batch.cols(); ++c) {
    col_cards.push_back(cardinalities[batch.column_schema.empty() ? c : batch.column_schema[c]]);
  }
  Encoding enc = Encoding::from_cardinalities(col_cards);
  Matrix out = Matrix::Zero(batch.rows(), enc.total_dim);
  for (int r = 0; r < batch.rows(); ++r) {
    auto codes = row_codes(batch, r, cardinalities);
    for (int c = 0; c < batch.cols(); ++c) out(r, enc.offsets[c] + codes[c]) = 1.0;
  }
  std::vector<int> schema;
  for (int c = 0; c < batch.cols(); ++c) {
    for (int k = 0; k < col_cards[c]; ++k) {
      schema.push_back(batch.column_schema.empty() ? c : batch.column_schema[c]);
    }
  }
  return {SampleBatch{std::move(out), std::move(schema)}, std::move(enc)};
}

SampleBatch dummy_decode(const Matrix& encoded, const Encoding& encoding) {
  if (encoded.cols() != encoding.total_dim) throw ShapeMismatch("dummy_decode: width mismatch");
  Matrix out(encoded.rows(), encoding.variable_count());
  for (Eigen::Index r = 0; r < encoded.rows(); ++r) {
    for (int v = 0; v < encoding.variable_count(); ++v) {
      Eigen::Index best;
      encoded.row(r).segment(encoding.offsets[v], encoding.widths[v]).maxCoeff(&best);
      out(r, v) = static_cast<double>(best);
    }
  }
  return identity_schema_batch(std::move(out));
}

DiscreteBayesNet random_cpts(const Dag& dag, std::vector<int> cardinalities, double concentration,
                             std::uint64_t seed) {
  if (!(concentration > 0.0)) throw DomainError("random_cpts: concentration must be positive");
  if (static_cast<int>(cardinalities.size()) != dag.node_count()) {
    throw InvalidNetwork("random_cpts: cardinality count mismatch");
  }
  Rng rng(seed, 0x637074ull);
  std::vector<Matrix> cpts;
  for (int i = 0; i < dag.node_count(); ++i) {
    long long rows = 1;
    for (int p : dag.parents(i)) rows *= cardinalities[p];
    Matrix t(rows, cardinalities[i]);
    for (long long r = 0; r < rows; ++r) {
      double total = 0.0;
      for (int c = 0; c < cardinalities[i]; ++c) {
        t(r, c) = rng.gamma(concentration);
        total += t(r, c);
      }
      if (!(total > 0.0)) {
        t.row(r).setConstant(1.0 / cardinalities[i]);
      } else {
        t.row(r) /= total;
        // Absorb rounding into the largest entry so rows sum to 1 to ~1 ulp.
        Eigen::Index best;
        t.row(r).maxCoeff(&best);
        t(r, best) += 1.0 - t.row(r).sum();
      }
    }
    cpts.push_back(std::move(t));
  }
  return DiscreteBayesNet(dag, std::move(cardinalities), std::move(cpts));
}

}  // namespace gigan
