// Grid evaluation of f_n: serial reference vs OpenMP direct sum vs spreading.

#include "stripkde/densities.hpp"
#include "stripkde/estimator.hpp"
#include "stripkde/kernels.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace stripkde;

void
run(benchmark::State& state, Evaluator ev)
{
  const auto n = state.range(0);
  const auto sched = bandwidth_schedule(0.5, n);
  const auto sample = density_sample(AnalyticDensity::sech(1.0), 42, static_cast<std::size_t>(n));
  const GridSpec grid{ 50.0, 0.01 };
  for (auto _ : state) {
    auto f = kde_evaluate(sample, sched, grid, ev);
    benchmark::DoNotOptimize(f.values().data());
  }
  state.SetItemsProcessed(state.iterations() * n * static_cast<std::int64_t>(grid.size()));
}

void
BM_reference(benchmark::State& s)
{
  run(s, Evaluator::reference);
}
void
BM_direct(benchmark::State& s)
{
  run(s, Evaluator::direct);
}
void
BM_spread(benchmark::State& s)
{
  run(s, Evaluator::spread);
}

} // namespace

BENCHMARK(BM_reference)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_direct)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spread)->Arg(1000)->Arg(10000)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
