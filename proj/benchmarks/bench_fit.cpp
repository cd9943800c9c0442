#include <benchmark/benchmark.h>

#include "cqr/estimator.hpp"
#include "cqr/inference.hpp"
#include "cqr/simulation.hpp"

namespace {

void BM_Fit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<std::size_t>(state.range(1));
  const double censoring = static_cast<double>(state.range(2)) / 100.0;
  const cqr::Dataset data = cqr::timing_design(n, p, censoring, 2024);
  for (auto _ : state) {
    cqr::QuantileProcess q = cqr::fit(data);
    benchmark::DoNotOptimize(q);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fit)
    ->ArgsProduct({{100, 200, 400, 800, 1600}, {2, 5, 9}, {0, 25, 50}})
    ->Unit(benchmark::kMillisecond);

void BM_Bootstrap(benchmark::State& state) {
  const cqr::SimulatedSample sample = cqr::generate(cqr::Scenario::make(2), 200, 11);
  const cqr::QuantileProcess point = cqr::fit(sample.data);
  const double taus[] = {0.1, 0.3, 0.5};
  cqr::BootstrapOptions options;
  options.replicates = static_cast<std::size_t>(state.range(0));
  options.threads = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto s = cqr::bootstrap(sample.data, point, taus, options);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Bootstrap)->ArgsProduct({{25, 50, 100}, {1, 0}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
