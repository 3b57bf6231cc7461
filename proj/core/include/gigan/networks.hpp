#pragma once

#include <cstdint>
#include <vector>

#include "gigan/bayesnet.hpp"

namespace gigan {

/// CHILD structure: 20 categorical nodes, 25 arcs, 60 one-hot dimensions.
Dag child_dag();
std::vector<int> child_cardinalities();

/// EARTHQUAKE structure: Burglary, Earthquake -> Alarm -> JohnCalls, MaryCalls.
Dag earthquake_dag();
std::vector<int> earthquake_cardinalities();

/// Structure with CPT rows drawn from Dirichlet(concentration).
DiscreteBayesNet child_net(std::uint64_t seed, double concentration = 1.0);
DiscreteBayesNet earthquake_net(std::uint64_t seed, double concentration = 1.0);

struct HasseGaussianParams {
  double phi_mean = 0.6;
  double phi_std = 0.05;
  double noise_std = 0.5;
  double root_mean = 0.0;
  double root_std = 1.0;
};

/// Linear-Gaussian net on hasse_dag(k) with phi_ji ~ N(phi_mean, phi_std^2).
LinearGaussianNet hasse_gaussian_net(int k, std::uint64_t seed, const HasseGaussianParams& params = {});

/// Families for the ball experiment: child-parent families with the
/// constant root family {y_t0} removed.
FamilySpec ball_families(int m_plus_1);

}  // namespace gigan
