#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gigan/training.hpp"

namespace gigan {

enum class Scale { Desk, Paper };

std::string to_string(Scale s);
Scale parse_scale(const std::string& name);

struct CaseStudy {
  /// hasse, ball, child, earthquake or certify.
  std::string tag;
  int run_count = 1;
  std::uint64_t base_seed = 0;
  Scale scale = Scale::Desk;
  /// Partial TrainConfig document merged over every variant's defaults.
  std::string overrides_json;
  std::optional<int> samples;
  std::optional<int> epochs;
  /// Subset of variants to run (all when empty).
  std::vector<std::string> variants;
  /// External CPT file replacing the random CPTs of child/earthquake.
  std::optional<std::filesystem::path> network_file;
  /// Parallel runs; 0 reads GIGAN_THREADS (default 1).
  int threads = 0;
  /// Trials per oracle check for the certify case.
  int certify_trials = 200;

  void validate() const;
};

/// Seeds of a case: base_seed, base_seed + 1, ...
std::vector<std::uint64_t> case_seeds(const CaseStudy& cs);

struct VariantSetup {
  std::string name;
  TrainConfig config;
};

/// Variants of a case with their default configurations for one seed.
std::vector<VariantSetup> case_variants(const CaseStudy& cs, std::uint64_t seed);

/// Default sample count of a case at the study's scale.
int case_sample_count(const CaseStudy& cs);

struct RunSummary {
  std::string variant;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::map<std::string, double> metrics;
};

struct CaseSummary {
  std::string tag;
  std::vector<RunSummary> runs;
  /// Metric name -> true when lower is better.
  std::map<std::string, bool> lower_is_better;

  [[nodiscard]] std::vector<std::string> variant_names() const;
  [[nodiscard]] std::vector<double> metric_values(const std::string& variant, const std::string& metric) const;
};

/// Trains every variant for every seed and writes
/// <out>/<case>/<variant>/run_<seed>/history.csv, <out>/<case>/summary.csv
/// and <out>/<case>/pairs.csv. The certify case writes one CSV per oracle
/// check plus the summary.
CaseSummary run_case(const CaseStudy& cs, const std::filesystem::path& out_dir);

/// One run of one variant: the data, training and final diagnostics.
RunSummary run_single(const CaseStudy& cs, const VariantSetup& variant, std::uint64_t seed,
                      const std::filesystem::path& run_dir, RunHistory* history_out = nullptr);

struct PairedComparison {
  std::string metric;
  std::string variant_a;
  std::string variant_b;
  int pairs = 0;
  int a_better = 0;
  int b_better = 0;
  int ties = 0;
  /// Per-seed differences a - b.
  std::vector<double> differences;
  double median_difference = 0.0;
};

/// Paired per-seed comparison of every variant pair on every metric.
/// Throws UnpairedRuns when two variants do not share their seed sets.
std::vector<PairedComparison> compare_variants(const CaseSummary& summary);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

/// Random-instance sweep of one oracle check. Checks: sandwich, duality,
/// data-processing, infimal, lower-bound, pot.
struct CheckTable {
  std::string check;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int trials = 0;
  int failures = 0;
};

CheckTable run_oracle_check(const std::string& check, int trials, std::uint64_t seed);
const std::vector<std::string>& oracle_check_names();

/// GIGAN_THREADS or 1.
int default_thread_count();

}  // namespace gigan
