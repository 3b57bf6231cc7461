#include <benchmark/benchmark.h>

#include "gigan/bayesnet.hpp"
#include "gigan/diagnostics.hpp"
#include "gigan/networks.hpp"
#include "gigan/nn.hpp"
#include "gigan/oracle.hpp"
#include "gigan/training.hpp"
#include "gigan/transport.hpp"

using namespace gigan;

namespace {

Matrix normal(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

Vector simplex(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (int k = 0; k < n; ++k) v[k] = rng.gamma(1.0);
  return v / v.sum();
}

void BM_MlpForwardBackward(benchmark::State& state) {
  MlpSpec s;
  s.input_dim = 16;
  s.hidden_widths = {static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
  s.spectral_norm = true;
  Mlp net(s);
  const Matrix x = normal(256, 16, 1);
  const Matrix g = Matrix::Ones(256, 1);
  std::vector<double> grad(net.parameter_count());
  for (auto _ : state) {
    ForwardCache cache;
    net.forward(x, &cache);
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(net.backward(cache, g, grad));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(16)->Arg(64)->Arg(128);

void BM_SpectralRefresh(benchmark::State& state) {
  MlpSpec s;
  s.input_dim = 64;
  s.hidden_widths = {128, 128};
  s.spectral_norm = true;
  Mlp net(s);
  for (auto _ : state) net.refresh_spectral(static_cast<int>(state.range(0)));
}
BENCHMARK(BM_SpectralRefresh)->Arg(1)->Arg(50);

void BM_TransportLp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Vector a = simplex(n, 1), b = simplex(n, 2);
  const Matrix c = normal(n, n, 3).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(transport_cost(a, b, c));
}
BENCHMARK(BM_TransportLp)->Arg(8)->Arg(32)->Arg(64);

void BM_FGammaPrimal(benchmark::State& state) {
  const std::vector<int> cards(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<int> vars(cards.size());
  for (std::size_t k = 0; k < vars.size(); ++k) vars[k] = static_cast<int>(k);
  const FinitePmf grid = FinitePmf::uniform(vars, cards);
  const FinitePmf q = grid.with_probs(simplex(grid.size(), 4));
  const FinitePmf p = grid.with_probs(simplex(grid.size(), 5));
  DivergenceSpec spec;
  spec.gamma = GammaClass::lipschitz(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(f_gamma_divergence(q, p, spec).value);
}
BENCHMARK(BM_FGammaPrimal)->Arg(1)->Arg(2)->Arg(3);

void BM_FGammaDual(benchmark::State& state) {
  const std::vector<int> cards(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<int> vars(cards.size());
  for (std::size_t k = 0; k < vars.size(); ++k) vars[k] = static_cast<int>(k);
  const FinitePmf grid = FinitePmf::uniform(vars, cards);
  const FinitePmf q = grid.with_probs(simplex(grid.size(), 6));
  const FinitePmf p = grid.with_probs(simplex(grid.size(), 7));
  DivergenceSpec spec;
  spec.gamma = GammaClass::lipschitz(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(f_gamma_dual(q, p, spec).value);
}
BENCHMARK(BM_FGammaDual)->Arg(1)->Arg(2)->Arg(3);

void BM_EnergyDistance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix x = normal(n, 8, 8), y = normal(n, 8, 9);
  for (auto _ : state) benchmark::DoNotOptimize(energy_distance(x, y));
}
BENCHMARK(BM_EnergyDistance)->Arg(500)->Arg(4000);

void BM_AncestralSampleChild(benchmark::State& state) {
  const auto net = child_net(1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ancestral_sample(net, 1000, ++seed));
}
BENCHMARK(BM_AncestralSampleChild);

void BM_TrainStepEarthquake(benchmark::State& state) {
  const auto net = earthquake_net(1);
  TrainConfig c;
  c.mode = state.range(0) ? DiscriminatorMode::GraphInformed : DiscriminatorMode::Monolithic;
  c.objective = ObjectiveForm::FganJs;
  c.batch_size = 256;
  c.latent_dim = 16;
  c.generator_hidden = {32, 32};
  c.critic_hidden = {32, 32};
  c.cardinalities = net.cardinalities();
  GanState s = init_state(c, net.dag(), net.node_count());
  const Matrix batch = dummy_encode(ancestral_sample(net, c.batch_size, 2), c.cardinalities).first.data;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(s, c, batch));
}
BENCHMARK(BM_TrainStepEarthquake)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
