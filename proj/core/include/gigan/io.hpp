#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "gigan/bayesnet.hpp"

namespace gigan {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  Matrix data;
};

/// Numeric CSV with one header line.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& data);

/// Free-form rows (already formatted cells).
void write_text_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

using AnyNet = std::variant<DiscreteBayesNet, LinearGaussianNet>;

/// Network document:
///   {"nodes": [{"name", "type": "categorical" | "gaussian", "parents": [names],
///               "cardinality", "cpt": [[...], ...],
///               "coeffs": {parent: value}, "noise_std", "root_mean", "root_std"}]}
/// All nodes of one document share a type. CPT rows follow the listed parent
/// order, lexicographic with the last parent fastest.
AnyNet parse_network(const std::string& json_text);
AnyNet load_network(const std::filesystem::path& path);
std::string network_to_json(const DiscreteBayesNet& net);
std::string network_to_json(const LinearGaussianNet& net);
void save_network(const std::filesystem::path& path, const AnyNet& net);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gigan
