// Parallel kernels against their serial references.
// Run with OMP_NUM_THREADS set to the core count of interest.

#include <map>

#include <benchmark/benchmark.h>

#include "tdid/bootstrap.hpp"
#include "tdid/dgp.hpp"
#include "tdid/monte_carlo.hpp"
#include "tdid/nuisance.hpp"
#include "tdid/regression.hpp"
#include "tdid/scores.hpp"

namespace {

using namespace tdid;

struct Sample {
  PanelDataset data;
  CellTable cells;
  NuisanceSet theta;
};

const Sample& sample(std::size_t n) {
  static std::map<std::size_t, Sample> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    DgpSpec spec;
    spec.n = n;
    spec.seed = 1;
    PanelDataset d = simulate_sample(spec);
    CellTable cells = cell_table(d);
    NuisanceSet theta = fit_nuisances(d, FitMode::ScoreSet, EstimatorConfig::default_simulation_nuisance());
    it = cache.emplace(n, Sample{std::move(d), cells, std::move(theta)}).first;
  }
  return it->second;
}

void BM_ScoresParallel(benchmark::State& state) {
  const Sample& s = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(score_vectors(kScoreKinds, s.data, s.cells, s.theta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoresSerial(benchmark::State& state) {
  const Sample& s = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(score_vectors_serial(kScoreKinds, s.data, s.cells, s.theta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

DgpSpec mc_spec() {
  DgpSpec spec;
  spec.n = 2000;
  spec.seed = 3;
  return spec;
}

void BM_MonteCarloParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(mc_spec(), static_cast<int>(state.range(0))));
}

void BM_MonteCarloSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo_serial(mc_spec(), static_cast<int>(state.range(0))));
}

std::vector<double> or_statistic(const PanelDataset& d) {
  const NuisanceSet theta = fit_nuisances(d, FitMode::EightModelOR);
  const OrDifferences diff = or_differences(d, theta);
  return {diff.a_minus_b.tau_hat, diff.a_minus_wb.tau_hat};
}

BootstrapConfig boot_config(benchmark::State& state) {
  BootstrapConfig cfg;
  cfg.replications = static_cast<int>(state.range(0));
  cfg.seed = 5;
  return cfg;
}

void BM_BootstrapParallel(benchmark::State& state) {
  const Sample& s = sample(400);
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap(s.data, or_statistic, boot_config(state)));
}

void BM_BootstrapSerial(benchmark::State& state) {
  const Sample& s = sample(400);
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_serial(s.data, or_statistic, boot_config(state)));
}

}  // namespace

BENCHMARK(BM_ScoresParallel)->Arg(2000)->Arg(20000)->Arg(200000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ScoresSerial)->Arg(2000)->Arg(20000)->Arg(200000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
