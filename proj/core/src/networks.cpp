#include "gigan/networks.hpp"

#include "gigan/rng.hpp"

namespace gigan {

namespace {

struct NodeDef {
  const char* name;
  int card;
  std::vector<const char*> parents;
};

const std::vector<NodeDef>& child_defs() {
  static const std::vector<NodeDef> defs = {
      {"BirthAsphyxia", 2, {}},
      {"HypDistrib", 2, {"DuctFlow", "CardiacMixing"}},
      {"HypoxiaInO2", 3, {"CardiacMixing", "LungParench"}},
      {"CO2", 3, {"LungParench"}},
      {"ChestXray", 5, {"LungParench", "LungFlow"}},
      {"Grunting", 2, {"LungParench", "Sick"}},
      {"LVHreport", 2, {"LVH"}},
      {"LowerBodyO2", 3, {"HypDistrib", "HypoxiaInO2"}},
      {"RUQO2", 3, {"HypoxiaInO2"}},
      {"CO2Report", 2, {"CO2"}},
      {"XrayReport", 5, {"ChestXray"}},
      {"Disease", 6, {"BirthAsphyxia"}},
      {"GruntingReport", 2, {"Grunting"}},
      {"Age", 3, {"Disease", "Sick"}},
      {"LVH", 2, {"Disease"}},
      {"DuctFlow", 3, {"Disease"}},
      {"CardiacMixing", 4, {"Disease"}},
      {"LungParench", 3, {"Disease"}},
      {"LungFlow", 3, {"Disease"}},
      {"Sick", 2, {"Disease"}},
  };
  return defs;
}

const std::vector<NodeDef>& earthquake_defs() {
  static const std::vector<NodeDef> defs = {
      {"Burglary", 2, {}},
      {"Earthquake", 2, {}},
      {"Alarm", 2, {"Burglary", "Earthquake"}},
      {"JohnCalls", 2, {"Alarm"}},
      {"MaryCalls", 2, {"Alarm"}},
  };
  return defs;
}

Dag build_dag(const std::vector<NodeDef>& defs) {
  std::vector<std::string> names;
  for (const auto& d : defs) names.emplace_back(d.name);
  auto index = [&](const char* name) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == name) return static_cast<int>(k);
    }
    return -1;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    for (const char* p : defs[i].parents) edges.emplace_back(index(p), static_cast<int>(i));
  }
  return Dag(static_cast<int>(defs.size()), std::move(edges), std::move(names));
}

std::vector<int> cards_of(const std::vector<NodeDef>& defs) {
  std::vector<int> out;
  for (const auto& d : defs) out.push_back(d.card);
  return out;
}

}  // namespace

Dag child_dag() { return build_dag(child_defs()); }
std::vector<int> child_cardinalities() { return cards_of(child_defs()); }
Dag earthquake_dag() { return build_dag(earthquake_defs()); }
std::vector<int> earthquake_cardinalities() { return cards_of(earthquake_defs()); }

DiscreteBayesNet child_net(std::uint64_t seed, double concentration) {
  return random_cpts(child_dag(), child_cardinalities(), concentration, seed);
}

DiscreteBayesNet earthquake_net(std::uint64_t seed, double concentration) {
  return random_cpts(earthquake_dag(), earthquake_cardinalities(), concentration, seed);
}

LinearGaussianNet hasse_gaussian_net(int k, std::uint64_t seed, const HasseGaussianParams& params) {
  Dag dag = hasse_dag(k);
  const int n = dag.node_count();
  Rng rng(seed, 0x6861737365ull);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  for (auto [j, i] : dag.edges()) phi(j, i) = rng.normal(params.phi_mean, params.phi_std);
  Vector noise = Vector::Constant(n, params.noise_std);
  Vector root_mean = Vector::Zero(n);
  Vector root_std = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (dag.is_root(i)) {
      root_mean[i] = params.root_mean;
      root_std[i] = params.root_std;
    }
  }
  return LinearGaussianNet(std::move(dag), std::move(phi), std::move(noise), std::move(root_mean),
                           std::move(root_std));
}

FamilySpec ball_families(int m_plus_1) {
  FamilySpec all = child_parent_families(ball_dag(m_plus_1));
  std::vector<std::vector<int>> fams(all.families.begin() + 1, all.families.end());
  return uniform_families(std::move(fams));
}

}  // namespace gigan
