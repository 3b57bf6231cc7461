// gigan: sampling, training, diagnostics, oracle checks and case studies.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "gigan/diagnostics.hpp"
#include "gigan/errors.hpp"
#include "gigan/experiments.hpp"
#include "gigan/io.hpp"
#include "gigan/oracle.hpp"
#include "gigan/training.hpp"

namespace fs = std::filesystem;
using namespace gigan;

namespace {

constexpr std::uint64_t kOutputStream = 0x6f7574707574;

const Dag& dag_of(const AnyNet& net) {
  return std::visit([](const auto& n) -> const Dag& { return n.dag(); }, net);
}

SampleBatch sample_net(const AnyNet& net, int count, std::uint64_t seed) {
  return std::visit([&](const auto& n) { return ancestral_sample(n, count, seed); }, net);
}

/// Reorders CSV columns to node order by header name.
SampleBatch batch_for_dag(const CsvTable& table, const Dag& dag) {
  if (static_cast<int>(table.header.size()) != dag.node_count()) {
    throw ShapeMismatch("CSV has " + std::to_string(table.header.size()) + " columns, network has " +
                        std::to_string(dag.node_count()) + " nodes");
  }
  Matrix data(table.data.rows(), dag.node_count());
  for (int c = 0; c < dag.node_count(); ++c) data.col(dag.index_of(table.header[c])) = table.data.col(c);
  return identity_schema_batch(std::move(data));
}

int cmd_sample(const std::string& net_path, int count, std::uint64_t seed, const std::string& out) {
  AnyNet net = load_network(net_path);
  SampleBatch s = sample_net(net, count, seed);
  write_csv(out, dag_of(net).node_names(), s.data);
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path, const std::string& net_path, int samples,
              const std::string& out) {
  TrainConfig config = config_from_json(read_text_file(config_path));
  std::optional<AnyNet> net;
  if (!net_path.empty()) net = load_network(net_path);
  SampleBatch data;
  Dag dag;
  if (net) {
    dag = dag_of(*net);
    data = data_path.empty() ? sample_net(*net, samples, mix_seed(config.seed, 0x64617461))
                             : batch_for_dag(read_csv(data_path), dag);
  } else {
    CsvTable table = read_csv(data_path);
    dag = Dag(static_cast<int>(table.header.size()), {}, table.header);
    data = identity_schema_batch(std::move(table.data));
  }
  if (const auto* d = net ? std::get_if<DiscreteBayesNet>(&*net) : nullptr; d && config.cardinalities.empty()) {
    config.cardinalities = d->cardinalities();
  }
  TrainResult tr = train(config, data, dag, net ? &*net : nullptr);
  fs::create_directories(out);
  tr.history.write_csv(fs::path(out) / "history.csv", static_cast<int>(tr.state.critics.size()));
  write_text_file(fs::path(out) / "checkpoint.json", checkpoint_to_json(tr.state, config));
  SampleBatch gen = generator_sample(tr.state, config, data.rows(), mix_seed(config.seed, kOutputStream));
  write_csv(fs::path(out) / "generated_samples.csv", dag.node_names(), gen.data);
  if (tr.history.aborted) {
    std::cerr << "run aborted: " << tr.history.abort_reason << "\n";
    return 3;
  }
  return 0;
}

int cmd_diagnose(const std::string& generated, const std::string& net_path, const std::string& reference,
                 const std::string& out) {
  AnyNet net = load_network(net_path);
  SampleBatch gen = batch_for_dag(read_csv(generated), dag_of(net));
  std::optional<SampleBatch> ref;
  if (!reference.empty()) ref = batch_for_dag(read_csv(reference), dag_of(net));
  DiagnosticsReport report = diagnose(gen, net, ref ? &*ref : nullptr);
  write_text_file(out, report.to_json());
  return 0;
}

int cmd_oracle(const std::string& check, int trials, std::uint64_t seed, const std::string& out) {
  CheckTable t = run_oracle_check(check, trials, seed);
  write_text_csv(out, t.header, t.rows);
  std::cout << check << ": " << t.trials - t.failures << "/" << t.trials << " instances hold\n";
  return t.failures == 0 ? 0 : 1;
}

int cmd_experiment(CaseStudy cs, const std::string& out) {
  CaseSummary summary = run_case(cs, out);
  std::cout << cs.tag << ": " << summary.runs.size() << " runs written to " << (fs::path(out) / cs.tag).string()
            << "\n";
  if (cs.tag == "certify") {
    for (const auto& r : summary.runs) {
      std::cout << "  " << r.variant << ": " << r.metrics.at("failures") << " failures of " << r.metrics.at("trials")
                << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-informed adversarial training and finite-support divergence oracle"};
  app.require_subcommand(1);

  auto* sample = app.add_subcommand("sample", "Ancestral samples of a network file");
  std::string s_net, s_out;
  int s_count = 1000;
  std::uint64_t s_seed = 0;
  sample->add_option("--net", s_net, "Network JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("--count", s_count, "Rows")->check(CLI::PositiveNumber);
  sample->add_option("--seed", s_seed, "Seed");
  sample->add_option("--out", s_out, "Output CSV")->required();

  auto* trn = app.add_subcommand("train", "Train a generator");
  std::string t_config, t_data, t_net, t_out;
  int t_samples = 4000;
  trn->add_option("--config", t_config, "TrainConfig JSON")->required()->check(CLI::ExistingFile);
  auto* data_opt = trn->add_option("--data", t_data, "Training CSV, header = node names")->check(CLI::ExistingFile);
  auto* net_opt = trn->add_option("--net", t_net, "Network JSON: structure, diagnostics and data when --data is absent")
                      ->check(CLI::ExistingFile);
  trn->add_option("--samples", t_samples, "Rows drawn from --net when --data is absent")->check(CLI::PositiveNumber);
  trn->add_option("--out", t_out, "Output directory")->required();
  trn->callback([&] {
    if (data_opt->count() == 0 && net_opt->count() == 0) throw CLI::ValidationError("train needs --data or --net");
  });

  auto* diag = app.add_subcommand("diagnose", "Diagnostics of generated samples against a network");
  std::string d_gen, d_net, d_ref, d_out;
  diag->add_option("--generated", d_gen, "Generated CSV")->required()->check(CLI::ExistingFile);
  diag->add_option("--net", d_net, "Network JSON")->required()->check(CLI::ExistingFile);
  diag->add_option("--reference", d_ref, "Reference CSV for the energy distance")->check(CLI::ExistingFile);
  diag->add_option("--out", d_out, "Output JSON")->required();

  auto* orc = app.add_subcommand("oracle", "Randomized certificate sweep");
  std::string o_check, o_out;
  int o_trials = 200;
  std::uint64_t o_seed = 0;
  orc->add_option("--check", o_check, "Check name")->required()->check(CLI::IsMember(oracle_check_names()));
  orc->add_option("--trials", o_trials, "Instances")->check(CLI::PositiveNumber);
  orc->add_option("--seed", o_seed, "Seed");
  orc->add_option("--out", o_out, "Output CSV")->required();

  auto* exp = app.add_subcommand("experiment", "Case study with repeated seeded runs");
  CaseStudy cs;
  std::string e_scale = "desk", e_out = "out", e_overrides, e_network;
  int e_samples = 0, e_epochs = -1;
  std::vector<std::string> case_names = {"hasse", "ball", "child", "earthquake", "certify"};
  exp->add_option("--case", cs.tag, "Case")->required()->check(CLI::IsMember(case_names));
  exp->add_option("--runs", cs.run_count, "Seeds per variant")->check(CLI::PositiveNumber);
  exp->add_option("--seed", cs.base_seed, "First seed");
  exp->add_option("--scale", e_scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  exp->add_option("--samples", e_samples, "Override the sample count");
  exp->add_option("--epochs", e_epochs, "Override the epoch budget");
  exp->add_option("--variants", cs.variants, "Subset of variants");
  exp->add_option("--overrides", e_overrides, "JSON merge patch applied to every TrainConfig");
  exp->add_option("--network", e_network, "Network JSON replacing the built-in one")->check(CLI::ExistingFile);
  exp->add_option("--threads", cs.threads, "Parallel runs (default: GIGAN_THREADS or 1)");
  exp->add_option("--trials", cs.certify_trials, "Instances per check for --case certify");
  exp->add_option("--out", e_out, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sample) return cmd_sample(s_net, s_count, s_seed, s_out);
    if (*trn) return cmd_train(t_config, t_data, t_net, t_samples, t_out);
    if (*diag) return cmd_diagnose(d_gen, d_net, d_ref, d_out);
    if (*orc) return cmd_oracle(o_check, o_trials, o_seed, o_out);
    if (*exp) {
      cs.scale = parse_scale(e_scale);
      cs.overrides_json = e_overrides;
      if (!e_network.empty()) cs.network_file = e_network;
      if (e_samples > 0) cs.samples = e_samples;
      if (e_epochs >= 0) cs.epochs = e_epochs;
      return cmd_experiment(cs, e_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
