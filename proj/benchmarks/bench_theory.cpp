#include "sumforge/theory.hpp"

#include <benchmark/benchmark.h>

using namespace sumforge;

namespace {

void BM_Gains(benchmark::State& state) {
  Engine rng(3);
  const auto j = random_joint(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gains(j));
}
BENCHMARK(BM_Gains)->Arg(2)->Arg(3)->Arg(4);

void BM_MonteCarlo(benchmark::State& state) {
  MonteCarloOptions o;
  o.samples = 1000;
  o.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(o));
}
BENCHMARK(BM_MonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace
