// OpenMP kernels against their serial references: the profile grid of the
// symmetric MLE and the replication loop of the efficiency study.
//
//   ./bench_parallel --benchmark_counters_tabular=true
//
// Set OMP_NUM_THREADS to vary the thread count of the parallel runs.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "lcsym/experiment.hpp"
#include "lcsym/refdist.hpp"
#include "lcsym/symmle.hpp"

using namespace lcsym;

namespace {

void BM_FitMLE(benchmark::State& state, Execution execution) {
  const auto x = sample(RefDensity::logistic(), static_cast<std::size_t>(state.range(0)), 99);
  MLEOptions opt;
  opt.execution = execution;
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(x, opt).theta_hat);
  state.counters["threads"] = execution == Execution::Parallel ? omp_get_max_threads() : 1;
}

void BM_Efficiency(benchmark::State& state, Execution execution) {
  ExperimentConfig cfg;
  cfg.densities = {"normal"};
  cfg.sizes = {static_cast<std::size_t>(state.range(0))};
  cfg.reps = 16;
  cfg.estimators = {"mle", "os:mean:pmle:trunc", "os:mean:smsym:trunc"};
  cfg.execution = execution;
  for (auto _ : state) benchmark::DoNotOptimize(run_efficiency(cfg).rows.size());
  state.counters["threads"] = execution == Execution::Parallel ? omp_get_max_threads() : 1;
}

}  // namespace

BENCHMARK_CAPTURE(BM_FitMLE, serial, Execution::Serial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FitMLE, parallel, Execution::Parallel)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Efficiency, serial, Execution::Serial)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Efficiency, parallel, Execution::Parallel)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
