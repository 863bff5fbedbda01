#include <benchmark/benchmark.h>

#include "hjpoisson/hj_training.hpp"

#include <random>

using namespace hjpoisson;

namespace {

struct Fixture {
  GeneratingFunctionNet net;
  std::vector<CollocationPoint> points;
  ResidualFn residual = make_hj_residual(QuadraticHamiltonian());
};

Fixture make_fixture(int width, int n_points) {
  TrainingConfig cfg;
  cfg.layer_sizes = {4, width, width, width, 1};
  cfg.n_points = n_points;
  cfg.batch_size = n_points;
  std::mt19937_64 rng(1);
  return {init_xavier(cfg.layer_sizes, 1), sample_collocation(cfg, rng)};
}

void BM_LossGradSerial(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto lg = kernels::loss_grad_serial(f.net, f.points, f.residual);
    benchmark::DoNotOptimize(lg.loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_LossGradParallel(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const int chunk = static_cast<int>(state.range(2));
  for (auto _ : state) {
    auto lg = kernels::loss_grad_parallel(f.net, f.points, f.residual, chunk);
    benchmark::DoNotOptimize(lg.loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

}  // namespace

BENCHMARK(BM_LossGradSerial)->Args({64, 5000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossGradParallel)
    ->Args({64, 5000, 4})
    ->Args({64, 5000, 8})
    ->Args({64, 5000, 16})
    ->Args({64, 5000, 32})
    ->Args({64, 5000, 64})
    ->Args({64, 5000, 128})
    ->Args({64, 5000, 512})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
