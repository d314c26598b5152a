#include <benchmark/benchmark.h>

#include <cmath>

#include "fpp/ctbp.hpp"
#include "fpp/degrees.hpp"
#include "fpp/explore.hpp"
#include "fpp/graph.hpp"
#include "fpp/quadrature.hpp"
#include "fpp/rng.hpp"
#include "fpp/weights.hpp"

namespace {

void BM_PairConfiguration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const fpp::DegreeSequence seq = fpp::build_regular(4, n);
  fpp::Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(fpp::pair_configuration(seq, rng));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_PairConfiguration)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

void BM_Explore(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  fpp::Rng rng(2);
  fpp::WeightedGraph g = fpp::pair_configuration(fpp::build_regular(4, n), rng);
  fpp::assign_weights(g, fpp::WeightDistribution::exponential(1.0), rng);
  for (auto _ : state) {
    fpp::SwgExplorer ex(g, 0, static_cast<fpp::Vertex>(n - 1));
    ex.finish();
    benchmark::DoNotOptimize(ex.result());
  }
}
BENCHMARK(BM_Explore)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMicrosecond);

void BM_Malthusian(benchmark::State& state) {
  const fpp::WeightDistribution law = fpp::WeightDistribution::power_exponential(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(fpp::solve_malthusian(3.0, law));
}
BENCHMARK(BM_Malthusian);

void BM_Quadrature(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpp::integrate([](double x) { return std::exp(-x * x) * std::cos(3 * x); }, 0.0, 8.0));
  }
}
BENCHMARK(BM_Quadrature);

void BM_Constants(benchmark::State& state) {
  const fpp::WeightDistribution law = fpp::WeightDistribution::uniform(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fpp::compute_constants(4.0, 3.0, law));
}
BENCHMARK(BM_Constants)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
