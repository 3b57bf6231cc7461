#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gigan/bayesnet.hpp"
#include "gigan/objectives.hpp"
#include "gigan/pmf.hpp"
#include "gigan/transport.hpp"

namespace gigan {

/// Named tolerances of the finite-support oracle.
struct OracleTolerances {
  double frank_wolfe_gap = 1e-10;
  int max_iterations = 20000;
  double barrier_gap = 1e-11;
};

/// Discriminator class Gamma.
struct GammaClass {
  enum class Kind { AllBounded, Lipschitz, SupBounded, AdditiveFamilies };
  Kind kind = Kind::Lipschitz;
  /// L for Lipschitz and AdditiveFamilies, c for SupBounded.
  double bound = 1.0;
  /// AdditiveFamilies: gamma = sum_i gamma_i(x_{F_i}), each gamma_i
  /// L-Lipschitz for the l1 metric on the codes of F_i.
  FamilySpec families;

  static GammaClass all_bounded();
  static GammaClass lipschitz(double L);
  static GammaClass sup_bounded(double c);
  static GammaClass additive(FamilySpec families, double L);
};

std::string to_string(GammaClass::Kind kind);

struct DivergenceSpec {
  FKind f = FKind::KL;
  GammaClass gamma;
  /// Metric on the support for Lipschitz classes; l1 over codes when absent.
  std::optional<FiniteMetric> metric;
};

/// sum_x p_x f(q_x / p_x) with f(0) and the recession slope at p_x = 0;
/// +inf for KL when Q is not absolutely continuous with respect to P.
double f_divergence(const Vector& q, const Vector& p, FKind f);
double f_divergence(const FinitePmf& q, const FinitePmf& p, FKind f);

/// sup_{gamma in Gamma} E_Q gamma - E_P gamma.
double ipm(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec);

struct PrimalResult {
  double value = 0.0;
  Vector r_star;
  bool converged = false;
  int iterations = 0;
  /// Which candidate attained the value: "interior", "R=Q" or "R=P".
  std::string source;
};

/// inf_R W^Gamma(Q, R) + D_f(R || P).
PrimalResult f_gamma_divergence(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec,
                                const OracleTolerances& tol = {});

struct DualResult {
  double value = 0.0;
  /// Optimal discriminator on the support.
  Vector gamma;
  /// Optimal shift (JS); log E_P e^gamma for KL.
  double nu = 0.0;
  bool converged = false;
};

/// sup_{gamma in Gamma} E_Q gamma - inf_nu { nu + E_P f*(gamma - nu) } with
/// f* the exact conjugate of f.
DualResult f_gamma_dual(const FinitePmf& q, const FinitePmf& p, const DivergenceSpec& spec,
                        const OracleTolerances& tol = {});

/// Exact conjugate of f used by the oracle: e^{s-1} for KL and
/// -log(2 - e^{2s}) / 2 (s < log(2) / 2) for the halved JS generator.
double oracle_conjugate(FKind f, double s);
double oracle_conjugate_derivative(FKind f, double s);

/// | R* - normalize((f*)'(gamma* - nu*) P) |_1.
double optimality_residual(const Vector& p, const Vector& r_star, const DualResult& dual, FKind f);

/// inf_R T_c(Q, R) + eps D_f(R || P).
PrimalResult proximal_ot(const Vector& q, const Vector& p, const Eigen::MatrixXd& cost, double eps,
                         FKind f = FKind::KL, const OracleTolerances& tol = {});

struct PotDualReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;  // primal - dual
  Vector phi;
  Vector psi;
};

/// sup_{phi + psi <= c} E_Q phi - eps log E_P e^{-psi / eps}, compared with proximal_ot (KL).
PotDualReport dual_pot_check(const Vector& q, const Vector& p, const Eigen::MatrixXd& cost, double eps,
                             const OracleTolerances& tol = {});

/// Row u of the kernel: the law of the full assignment given the family
/// configuration u of F = {i} u Pa(i), built from Q's factorization.
/// Shape: |family grid| x |full grid|.
Eigen::MatrixXd conditional_kernel(const DiscreteBayesNet& q_net, int node);

/// Family variables {i} u Pa(i), ascending.
std::vector<int> family_of(const Dag& dag, int node);

/// I_{i,Pa(i)}[gamma] on the family grid.
Vector conditional_expectation_operator(const DiscreteBayesNet& q_net, int node, const Vector& gamma);

/// P_F (x) kernel: the lifted measure on the full grid.
Vector lift_family_measure(const DiscreteBayesNet& q_net, int node, const Vector& p_family);

struct DataProcessingReport {
  double lhs = 0.0;  // D_f^{I[Gamma]}(Q_F || P_F)
  double rhs = 0.0;  // D_f^Gamma(Q || P_F (x) K)
  double slack = 0.0;
  bool holds = false;
};

DataProcessingReport certify_data_processing(const DiscreteBayesNet& q_net, int node, const Vector& p_family,
                                             const DivergenceSpec& spec, double tolerance = 1e-4,
                                             const OracleTolerances& tol = {});

/// Transport cost between family configurations: (K c K^T)(u, v).
Eigen::MatrixXd aggregated_cost(const DiscreteBayesNet& q_net, int node, const Eigen::MatrixXd& base_cost);

/// The discrepancy a certificate is computed for.
enum class Discrepancy { FGamma, Ipm };

enum class ModelClass { AllPmfs, GraphFactorized, ProductPmfs };
std::string to_string(ModelClass m);
ModelClass parse_model_class(const std::string& name);

struct InfimalOptions {
  Discrepancy discrepancy = Discrepancy::FGamma;
  int starts = 3;
  int max_steps = 400;
  double target = 1e-10;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

struct InfimalReport {
  double inf_global = 0.0;
  double inf_local_average = 0.0;
  bool holds = false;
  /// False for ProductPmfs, which lies outside the classes the inequality covers.
  bool asserted = true;
  int evaluations = 0;
};

/// Minimizes D(Q || P) and (1/n) sum_i D_i(Q_F || P_F) over the model
/// class with multi-start descent. D_i uses the same f and the class
/// restricted to family F_i = {i} u Pa(i) with the l1 metric on its codes.
InfimalReport certify_infimal_subadditivity(const DiscreteBayesNet& q_net, const DivergenceSpec& spec,
                                            ModelClass model_class, const InfimalOptions& options = {});

/// Value and gradient with respect to P (on the full grid) of a global
/// discrepancy, used by the certificate.
double discrepancy_with_gradient(const FinitePmf& q, const Vector& p, const DivergenceSpec& spec,
                                 Discrepancy kind, Vector* grad);

struct LowerBoundReport {
  double local_average = 0.0;
  double global = 0.0;
  bool holds = false;
};

/// (1/n) sum_i D_f^{Gamma^L_F}(Q_F || P_F) <= D_f^{Gamma^L}(Q || P).
LowerBoundReport certify_lower_bound(const DiscreteBayesNet& q_net, const DiscreteBayesNet& p_net,
                                     const DivergenceSpec& spec, double tolerance = 1e-4);

/// Exact W1 between the empirical laws of two real samples.
double empirical_w1_1d(std::vector<double> a, std::vector<double> b);

/// max over (x_parents, x_child) of |R(x_child | x_all_before) - R(x_child | x_parents)|
/// for the joint pmf `r` on a grid, where `before` lists the conditioning
/// set of the full conditional.
double conditional_independence_residual(const FinitePmf& r, int child, const std::vector<int>& parents,
                                         const std::vector<int>& before);

}  // namespace gigan
