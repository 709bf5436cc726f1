#include <benchmark/benchmark.h>

#include "gosta/datasets.hpp"
#include "gosta/engines.hpp"
#include "gosta/expectation.hpp"
#include "gosta/experiment.hpp"
#include "gosta/kernels.hpp"
#include "gosta/spectral.hpp"

namespace {

gosta::Dataset mixture(std::size_t n) {
  gosta::Rng rng(7);
  return gosta::synth_gaussian_mixture(n, 2, 3, 10.0, rng);
}

void BM_BuildScatterKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const gosta::Dataset d = mixture(n);
  const auto kernel = gosta::scatter_kernel(*d.partition);
  for (auto _ : state) benchmark::DoNotOptimize(gosta::build_kernel_matrix(kernel, d.design).u_stat());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildScatterKernel)->RangeMultiplier(4)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_ProtocolIterations(benchmark::State& state) {
  const auto p = static_cast<gosta::Protocol>(state.range(0));
  const gosta::Graph g = gosta::graph_from_spec("ws:100:5:0.3:3");
  const gosta::Dataset d = mixture(100);
  const auto h = gosta::build_kernel_matrix(gosta::scatter_kernel(*d.partition), d.design);
  auto engine = gosta::make_engine(p, g, h, 2);
  gosta::Rng rng(1);
  for (auto _ : state) engine->step(rng);
  state.SetLabel(std::string(gosta::to_string(p)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ProtocolIterations)
    ->Arg(static_cast<int>(gosta::Protocol::u1))
    ->Arg(static_cast<int>(gosta::Protocol::u2))
    ->Arg(static_cast<int>(gosta::Protocol::gosta_sync))
    ->Arg(static_cast<int>(gosta::Protocol::gosta_async))
    ->Arg(static_cast<int>(gosta::Protocol::flooding));

void BM_SyncExpectation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const gosta::Graph g = gosta::make_complete(n);
  const gosta::Dataset d = mixture(n);
  const auto h = gosta::build_kernel_matrix(gosta::euclidean_kernel(), d.design);
  const auto cps = gosta::geometric_checkpoints(500);
  for (auto _ : state) benchmark::DoNotOptimize(gosta::gosta_sync_expectation(g, h, cps).mean.back());
}
BENCHMARK(BM_SyncExpectation)->Arg(8)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_AlgebraicConnectivity(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const gosta::Graph g = gosta::make_grid2d(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(gosta::algebraic_connectivity(g));
}
BENCHMARK(BM_AlgebraicConnectivity)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
