#include <benchmark/benchmark.h>

#include "specfilt/filtering.hpp"
#include "specfilt/graph.hpp"
#include "specfilt/rng.hpp"

namespace {

specfilt::SparseMatrix grid_adjacency(int side) {
  return specfilt::normalized_adjacency(specfilt::build_grid_graph(side, side));
}

void bm_spmv(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto p = grid_adjacency(side);
  specfilt::Rng rng(1);
  std::vector<double> x(static_cast<std::size_t>(side) * side);
  for (double& v : x) v = rng.normal();
  for (auto _ : state) {
    auto y = specfilt::spmv(p, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(x.size()));
}
BENCHMARK(bm_spmv)->Arg(24)->Arg(64)->Arg(128);

void bm_optbasis_filtering(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int order = static_cast<int>(state.range(1));
  const auto p = grid_adjacency(side);
  const int n = side * side;
  specfilt::Rng rng(1);
  specfilt::SignalMatrix x(n, 3);
  for (double& v : x.data) v = rng.normal();
  specfilt::CoefficientMatrix alpha(3, order + 1);
  for (double& v : alpha.data) v = rng.normal();
  for (auto _ : state) {
    auto [z, vecs] = specfilt::optbasis_filtering(p, x, alpha, order, false);
    benchmark::DoNotOptimize(z.data.data());
  }
}
BENCHMARK(bm_optbasis_filtering)->Args({24, 10})->Args({64, 10})->Args({64, 20});

void bm_favard_filtering(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int order = static_cast<int>(state.range(1));
  const auto p = grid_adjacency(side);
  const int n = side * side;
  specfilt::Rng rng(1);
  specfilt::SignalMatrix x(n, 3);
  for (double& v : x.data) v = rng.normal();
  specfilt::CoefficientMatrix alpha(3, order + 1);
  for (double& v : alpha.data) v = rng.normal();
  specfilt::DenseMatrix sqrt_beta(3, order + 2);
  specfilt::DenseMatrix gamma(3, order + 1);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k <= order + 1; ++k) sqrt_beta(l, k) = 1.0;
  for (auto _ : state) {
    auto z = specfilt::favard_filtering(p, x, sqrt_beta, gamma, alpha);
    benchmark::DoNotOptimize(z.data.data());
  }
}
BENCHMARK(bm_favard_filtering)->Args({24, 10})->Args({64, 10})->Args({64, 20});

}  // namespace

BENCHMARK_MAIN();
