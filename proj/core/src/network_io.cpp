#include <nlohmann/json.hpp>

#include "gigan/errors.hpp"
#include "gigan/io.hpp"

namespace gigan {

using nlohmann::json;

namespace {

int node_index(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return static_cast<int>(k);
  }
  throw InvalidNetwork("unknown parent '" + name + "'");
}

}  // namespace

AnyNet parse_network(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("network JSON: ") + e.what());
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw InvalidNetwork("network JSON: missing nonempty 'nodes' array");
  }
  const auto& nodes = doc["nodes"];
  const int n = static_cast<int>(nodes.size());
  std::vector<std::string> names;
  std::string type;
  try {
    for (const auto& node : nodes) {
      names.push_back(node.at("name").get<std::string>());
      std::string t = node.value("type", std::string("categorical"));
      if (t != "categorical" && t != "gaussian") throw InvalidNetwork("unknown node type '" + t + "'");
      if (!type.empty() && t != type) throw InvalidNetwork("mixed node types are not supported");
      type = t;
    }
    std::vector<std::vector<int>> declared(n);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (const auto& p : nodes[i].value("parents", json::array())) {
        int j = node_index(names, p.get<std::string>());
        declared[i].push_back(j);
        edges.emplace_back(j, i);
      }
    }
    Dag dag(n, std::move(edges), names);

    if (type == "categorical") {
      std::vector<int> cards(n);
      for (int i = 0; i < n; ++i) cards[i] = nodes[i].at("cardinality").get<int>();
      std::vector<Matrix> cpts;
      for (int i = 0; i < n; ++i) {
        const auto& rows = nodes[i].at("cpt");
        Matrix t(static_cast<Eigen::Index>(rows.size()), cards[i]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (static_cast<int>(rows[r].size()) != cards[i]) {
            throw InvalidNetwork("CPT row width mismatch at node " + names[i]);
          }
          for (int c = 0; c < cards[i]; ++c) t(static_cast<Eigen::Index>(r), c) = rows[r][c].get<double>();
        }
        cpts.push_back(std::move(t));
      }
      return DiscreteBayesNet(std::move(dag), std::move(cards), std::move(cpts), std::move(declared));
    }

    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
    Vector noise = Vector::Zero(n), rmean = Vector::Zero(n), rstd = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      const auto& node = nodes[i];
      if (node.contains("coeffs")) {
        for (auto it = node["coeffs"].begin(); it != node["coeffs"].end(); ++it) {
          phi(node_index(names, it.key()), i) = it.value().get<double>();
        }
      }
      for (int j : declared[i]) {
        if (!node.contains("coeffs") || !node["coeffs"].contains(names[j])) {
          throw InvalidNetwork("missing coefficient " + names[j] + "->" + names[i]);
        }
      }
      noise[i] = node.value("noise_std", 0.0);
      rmean[i] = node.value("root_mean", 0.0);
      rstd[i] = node.value("root_std", node.value("noise_std", 0.0));
    }
    return LinearGaussianNet(std::move(dag), std::move(phi), std::move(noise), std::move(rmean),
                             std::move(rstd));
  } catch (const json::exception& e) {
    throw InvalidNetwork(std::string("network JSON: ") + e.what());
  }
}

AnyNet load_network(const std::filesystem::path& path) { return parse_network(read_text_file(path)); }

std::string network_to_json(const DiscreteBayesNet& net) {
  json nodes = json::array();
  const Dag& dag = net.dag();
  for (int i = 0; i < net.node_count(); ++i) {
    json node;
    node["name"] = dag.name(i);
    node["type"] = "categorical";
    node["cardinality"] = net.cardinalities()[i];
    json parents = json::array();
    for (int p : net.parent_order(i)) parents.push_back(dag.name(p));
    node["parents"] = parents;
    json rows = json::array();
    const Matrix& t = net.cpt(i);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
      rows.push_back(row);
    }
    node["cpt"] = rows;
    nodes.push_back(node);
  }
  return json{{"nodes", nodes}}.dump(2);
}

std::string network_to_json(const LinearGaussianNet& net) {
  json nodes = json::array();
  const Dag& dag = net.dag();
  for (int i = 0; i < net.node_count(); ++i) {
    json node;
    node["name"] = dag.name(i);
    node["type"] = "gaussian";
    json parents = json::array();
    json coeffs = json::object();
    for (int p : dag.parents(i)) {
      parents.push_back(dag.name(p));
      coeffs[dag.name(p)] = net.coeff(p, i);
    }
    node["parents"] = parents;
    if (dag.is_root(i)) {
      node["root_mean"] = net.root_mean()[i];
      node["root_std"] = net.root_std()[i];
    } else {
      node["coeffs"] = coeffs;
      node["noise_std"] = net.noise_std()[i];
    }
    nodes.push_back(node);
  }
  return json{{"nodes", nodes}}.dump(2);
}

void save_network(const std::filesystem::path& path, const AnyNet& net) {
  std::visit([&](const auto& n) { write_text_file(path, network_to_json(n) + "\n"); }, net);
}

}  // namespace gigan
