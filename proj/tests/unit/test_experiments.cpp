#include <doctest.h>

#include <filesystem>

#include "gigan/errors.hpp"
#include "gigan/experiments.hpp"
#include "gigan/io.hpp"

using namespace gigan;

namespace {

RunSummary run(const std::string& variant, std::uint64_t seed, double loss) {
  RunSummary r;
  r.variant = variant;
  r.seed = seed;
  r.metrics["loss"] = loss;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gigan_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("quantiles") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
    CHECK(quantile({0.0, 10.0}, 0.3) == doctest::Approx(3.0));
    CHECK(quantile({7.0}, 0.9) == 7.0);
    CHECK(quantile({1.0, 2.0}, 0.0) == 1.0);
    CHECK(quantile({1.0, 2.0}, 1.0) == 2.0);
  }

  TEST_CASE("paired comparison") {
    CaseSummary s;
    s.tag = "toy";
    s.lower_is_better["loss"] = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      s.runs.push_back(run("a", seed, 1.0));
      s.runs.push_back(run("b", seed, seed <= 3 ? 2.0 : (seed == 4 ? 1.0 : 0.5)));
    }
    CHECK(s.variant_names() == std::vector<std::string>{"a", "b"});
    CHECK(s.metric_values("b", "loss").size() == 5);
    const auto cmp = compare_variants(s);
    REQUIRE(cmp.size() == 1);
    CHECK(cmp[0].pairs == 5);
    CHECK(cmp[0].a_better == 3);
    CHECK(cmp[0].b_better == 1);
    CHECK(cmp[0].ties == 1);
    CHECK(cmp[0].median_difference == -1.0);

    s.runs.push_back(run("a", 9, 1.0));
    CHECK_THROWS_AS(compare_variants(s), UnpairedRuns);
  }

  TEST_CASE("case variants") {
    CaseStudy cs;
    cs.tag = "hasse";
    auto v = case_variants(cs, 3);
    REQUIRE(v.size() == 3);
    CHECK(v[0].name == "monolithic");
    CHECK(v[1].name == "graph_informed");
    CHECK(v[2].name == "misaligned");
    CHECK(v[1].config.seed == 3);
    CHECK(v[1].config.objective == ObjectiveForm::DvKl);

    cs.tag = "ball";
    CHECK(case_variants(cs, 1).size() == 4);
    cs.tag = "child";
    CHECK(case_variants(cs, 1).size() == 3);
    cs.tag = "earthquake";
    cs.variants = {"M1"};
    cs.epochs = 7;
    cs.overrides_json = R"({"batch_size": 32, "seed": 999})";
    v = case_variants(cs, 4);
    REQUIRE(v.size() == 1);
    CHECK(v[0].config.max_epochs == 7);
    CHECK(v[0].config.batch_size == 32);
    CHECK(v[0].config.seed == 4);

    cs.variants = {"nope"};
    CHECK_THROWS(case_variants(cs, 1));
    cs.tag = "mnist";
    CHECK_THROWS(cs.validate());
    CHECK(parse_scale("paper") == Scale::Paper);
    CHECK_THROWS_AS(parse_scale("huge"), ParseError);
  }

  TEST_CASE("seeds") {
    CaseStudy cs;
    cs.tag = "hasse";
    cs.run_count = 4;
    cs.base_seed = 10;
    CHECK(case_seeds(cs) == std::vector<std::uint64_t>{10, 11, 12, 13});
  }

  TEST_CASE("oracle checks") {
    CHECK(oracle_check_names().size() == 6);
    for (const auto& name : oracle_check_names()) {
      const auto t = run_oracle_check(name, 6, 7);
      CHECK(t.check == name);
      CHECK(t.trials == 6);
      CHECK(t.rows.size() == 6);
      CHECK(t.failures == 0);
      for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
    }
    CHECK_THROWS_AS(run_oracle_check("unknown", 1, 1), ParseError);
  }

  TEST_CASE("a small case writes its tables") {
    CaseStudy cs;
    cs.tag = "earthquake";
    cs.run_count = 2;
    cs.base_seed = 1;
    cs.samples = 600;
    cs.epochs = 1;
    cs.overrides_json = R"({"batch_size": 64})";
    const auto dir = scratch("case");
    const auto summary = run_case(cs, dir);
    CHECK(summary.runs.size() == 4);
    CHECK(std::filesystem::exists(dir / "earthquake" / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "earthquake" / "pairs.csv"));
    CHECK(std::filesystem::exists(dir / "earthquake" / "M1" / "run_2" / "history.csv"));
    const auto table = read_text_file(dir / "earthquake" / "summary.csv");
    CHECK(table.rfind("variant,metric,runs,finite,median,q1,q3,aborted_runs", 0) == 0);
    for (const auto& r : summary.runs) {
      CHECK(r.metrics.count("max_tv") == 1);
      CHECK(r.metrics.count("energy_distance") == 1);
    }
    std::filesystem::remove_all(dir);
  }
}
