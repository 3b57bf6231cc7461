#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gigan/bayesnet.hpp"
#include "gigan/errors.hpp"
#include "gigan/networks.hpp"
#include "gigan/training.hpp"
#include "support.hpp"

using namespace gigan;

namespace {

TrainConfig hasse_config() {
  TrainConfig c;
  c.mode = DiscriminatorMode::GraphInformed;
  c.objective = ObjectiveForm::DvKl;
  c.batch_size = 128;
  c.max_epochs = 10;
  c.lr_disc = 1e-3;
  c.lr_gen = 3e-3;
  c.latent_dim = 8;
  c.generator_activation = Activation::Identity;
  c.critic_hidden = {16, 16};
  c.seed = 5;
  return c;
}

TrainConfig categorical_config(const DiscreteBayesNet& net) {
  TrainConfig c;
  c.objective = ObjectiveForm::FganJs;
  c.batch_size = 64;
  c.max_epochs = 2;
  c.latent_dim = 4;
  c.generator_hidden = {8};
  c.critic_hidden = {8};
  c.cardinalities = net.cardinalities();
  c.seed = 3;
  return c;
}

std::vector<double> flat(const Mlp& m) { return {m.params().begin(), m.params().end()}; }

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("config JSON round trip and validation") {
    TrainConfig c = hasse_config();
    c.early_stop.metric = "energy_distance";
    c.early_stop.threshold = 0.05;
    c.families = uniform_families({{0}, {0, 1}});
    c.cardinalities = {2, 3};
    c.adam_beta1 = 0.3;
    const TrainConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(back.early_stop.threshold.value() == 0.05);
    CHECK(back.families->families.size() == 2);
    CHECK(back.adam_beta1 == 0.3);

    TrainConfig bad = hasse_config();
    bad.batch_size = 1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = hasse_config();
    bad.adam_beta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = hasse_config();
    bad.early_stop.metric = "accuracy";
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK_THROWS_AS(config_from_json("[1, 2"), ParseError);
    CHECK(parse_mode(to_string(DiscriminatorMode::Misaligned)) == DiscriminatorMode::Misaligned);
  }

  TEST_CASE("generator sampling") {
    const auto net = random_cpts(Dag(3, {{0, 1}, {1, 2}}), {3, 2, 4}, 1.0, 1);
    const TrainConfig c = categorical_config(net);
    const GanState s = init_state(c, net.dag(), 3);
    const auto a = generator_sample(s, c, 20, 9), b = generator_sample(s, c, 20, 9);
    CHECK(a.data == b.data);
    const auto relaxed = generator_sample(s, c, 20, 9, true);
    const Encoding enc = Encoding::from_cardinalities(c.cardinalities);
    for (int r = 0; r < relaxed.rows(); ++r) {
      for (int v = 0; v < 3; ++v) {
        CHECK(std::abs(relaxed.data.row(r).segment(enc.offsets[v], enc.widths[v]).sum() - 1.0) < 1e-12);
      }
    }

    GanState sat = s;
    const int last = sat.generator.layer_count() - 1;
    sat.generator.weight(last).setZero();
    sat.generator.bias(last).setZero();
    sat.generator.bias(last)[enc.offsets[2] + 1] = 20.0;
    const auto hard = generator_sample(sat, c, 10000, 4);
    int hits = 0;
    for (int r = 0; r < hard.rows(); ++r) hits += hard.data(r, 2) == 1.0;
    CHECK(hits > 0.999 * 10000);
  }

  TEST_CASE("zero learning rates leave parameters unchanged") {
    const auto truth = hasse_gaussian_net(2, 1);
    TrainConfig c = hasse_config();
    c.lr_disc = 0.0;
    c.lr_gen = 0.0;
    GanState s = init_state(c, truth.dag(), truth.node_count());
    const auto g0 = flat(s.generator);
    const auto c0 = flat(s.critics[0]);
    const auto batch = ancestral_sample(truth, c.batch_size, 2);
    train_step(s, c, batch.data);
    train_step(s, c, batch.data);
    CHECK(flat(s.generator) == g0);
    CHECK(flat(s.critics[0]) == c0);
    CHECK(s.step == 2);
  }

  TEST_CASE("one critic step follows the analytic gradient") {
    // A bias-only critic gamma = b: the DV objective is constant in b, the
    // f-GAN KL objective b - e^{b-1} has derivative 1 - e^{b-1}.
    const auto truth = hasse_gaussian_net(1, 1);
    TrainConfig c = hasse_config();
    c.mode = DiscriminatorMode::Monolithic;
    c.objective = ObjectiveForm::FganKl;
    c.critic_hidden = {};
    c.spectral_norm = false;
    c.lr_gen = 0.0;
    for (double b0 : {-1.0, 3.0}) {
      GanState s = init_state(c, truth.dag(), truth.node_count());
      s.critics[0].weight(0).setZero();
      s.critics[0].bias(0)[0] = b0;
      train_step(s, c, ancestral_sample(truth, c.batch_size, 3).data);
      const double moved = s.critics[0].bias(0)[0] - b0;
      CHECK(moved * (1.0 - std::exp(b0 - 1.0)) > 0.0);
    }
  }

  TEST_CASE("a single family V equals monolithic mode step for step") {
    const auto truth = hasse_gaussian_net(2, 7);
    TrainConfig mono = hasse_config();
    mono.mode = DiscriminatorMode::Monolithic;
    TrainConfig single = hasse_config();
    single.families = monolithic_family(truth.node_count());
    GanState a = init_state(mono, truth.dag(), truth.node_count());
    GanState b = init_state(single, truth.dag(), truth.node_count());
    for (int t = 0; t < 5; ++t) {
      const auto batch = ancestral_sample(truth, mono.batch_size, 100 + t);
      CHECK(train_step(a, mono, batch.data) == train_step(b, single, batch.data));
    }
    CHECK(flat(a.generator) == flat(b.generator));
    CHECK(flat(a.critics[0]) == flat(b.critics[0]));
  }

  TEST_CASE("critics see only their family columns") {
    const auto net = random_cpts(Dag(3, {{0, 1}, {1, 2}}), {3, 2, 4}, 1.0, 1);
    const TrainConfig c = categorical_config(net);
    const GanState s = init_state(c, net.dag(), 3);
    const Encoding enc = Encoding::from_cardinalities(c.cardinalities);
    CHECK(s.columns == family_columns(s.families, &enc));
    for (std::size_t i = 0; i < s.critics.size(); ++i) {
      CHECK(s.critics[i].spec().input_dim == static_cast<int>(s.columns[i].size()));
    }
  }

  TEST_CASE("zero epochs") {
    const auto truth = hasse_gaussian_net(2, 1);
    TrainConfig c = hasse_config();
    c.max_epochs = 0;
    const auto res = train(c, ancestral_sample(truth, 500, 1), truth.dag());
    CHECK(res.history.records.empty());
    CHECK(res.state.epoch == 0);
  }

  TEST_CASE("Hasse smoke run is finite and deterministic") {
    const auto truth = hasse_gaussian_net(3, 2);
    const auto data = ancestral_sample(truth, 2000, 3);
    const TrainConfig c = hasse_config();
    const AnyNet any(truth);
    const auto a = train(c, data, truth.dag(), &any);
    CHECK_FALSE(a.history.aborted);
    CHECK(a.history.records.size() == 20);
    for (const auto& r : a.history.records) CHECK(std::isfinite(r.objective));
    const auto b = train(c, data, truth.dag(), &any);
    const int critics = static_cast<int>(a.state.critics.size());
    CHECK(a.history.to_csv(critics) == b.history.to_csv(critics));

    const auto h = a.history.header(critics);
    CHECK(h.front() == "epoch");
    CHECK(h.back() == "seconds");
    CHECK(h.size() == static_cast<std::size_t>(6 + critics));
    const std::string ck = checkpoint_to_json(a.state, c);
    for (const char* key : {"\"config\"", "\"generator\"", "\"critics\"", "\"families\""}) {
      CHECK(ck.find(key) != std::string::npos);
    }
  }

  TEST_CASE("early stopping") {
    const auto truth = hasse_gaussian_net(2, 4);
    const auto data = ancestral_sample(truth, 1000, 5);
    TrainConfig c = hasse_config();
    c.lr_disc = 0.0;
    c.lr_gen = 0.0;
    c.max_epochs = 30;
    c.early_stop.metric = "energy_distance";
    c.early_stop.patience = 3;
    const auto res = train(c, data, truth.dag());
    CHECK(res.history.early_stopped);
    CHECK(res.state.epoch == c.early_stop.patience + 1);

    c.early_stop.threshold = 1e9;
    c.early_stop.patience = 2;
    const auto th = train(c, data, truth.dag());
    CHECK(th.history.early_stopped);
    CHECK(th.state.epoch == 2);
  }

  TEST_CASE("spectral-norm runs on the ball model never abort") {
    const BallModel model;
    const auto data = ball_sample(model, 600, 1);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      TrainConfig c;
      c.mode = DiscriminatorMode::GraphInformed;
      c.families = ball_families(model.m_plus_1);
      c.objective = ObjectiveForm::DvKl;
      c.batch_size = 64;
      c.max_epochs = 2;
      c.latent_dim = 8;
      c.generator_hidden = {16};
      c.critic_hidden = {8};
      c.spectral_norm = true;
      c.seed = seed;
      const auto res = train(c, data, ball_dag(model.m_plus_1));
      CHECK_FALSE(res.history.aborted);
    }
  }

  TEST_CASE("data must match the graph") {
    const auto truth = hasse_gaussian_net(2, 1);
    CHECK_THROWS_AS(train(hasse_config(), ancestral_sample(truth, 500, 1), Dag(2, {})), ShapeMismatch);
  }
}
