#include <benchmark/benchmark.h>

#include "qvipower/analysis.hpp"
#include "qvipower/dinkelbach.hpp"
#include "qvipower/experiment.hpp"
#include "qvipower/solvers.hpp"
#include "qvipower/waterfill.hpp"

using namespace qvipower;

namespace {

GameInstance bench_instance(int K, int N, double sir_db) {
  ExperimentSpec spec;
  spec.K = K;
  spec.N = N;
  spec.roles.assign(static_cast<std::size_t>(K), Role::Rate);
  for (int k = 0; k < K / 2; ++k) spec.roles[static_cast<std::size_t>(k)] = Role::Ee;
  spec.snr_db.assign(static_cast<std::size_t>(K) * N, 0.0);
  spec.sir_grid_db = {sir_db};
  spec.budget.assign(static_cast<std::size_t>(K), static_cast<double>(N));
  spec.circuit.assign(static_cast<std::size_t>(K), 1.0);
  return sample_channel(spec, sir_db, 42);
}

EffectiveNoise bench_noise(int n) {
  EffectiveNoise noise;
  noise.zeta.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) noise.zeta[static_cast<std::size_t>(i)] = 0.1 + 0.07 * i;
  return noise;
}

void BM_level_for_budget(benchmark::State& state) {
  const EffectiveNoise noise = bench_noise(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(level_for_budget(noise, 4.0));
}
BENCHMARK(BM_level_for_budget)->Arg(16)->Arg(64)->Arg(256);

void BM_project_simplex(benchmark::State& state) {
  const EffectiveNoise noise = bench_noise(static_cast<int>(state.range(0)));
  std::vector<double> z(noise.zeta.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = -noise.zeta[i];
  for (auto _ : state) benchmark::DoNotOptimize(project_simplex(z, 4.0));
}
BENCHMARK(BM_project_simplex)->Arg(16)->Arg(64)->Arg(256);

void BM_dinkelbach(benchmark::State& state) {
  const EffectiveNoise noise = bench_noise(static_cast<int>(state.range(0)));
  const DinkelbachOptions opt{1e-6, 200, {}};
  for (auto _ : state)
    benchmark::DoNotOptimize(dinkelbach(noise, 1.0, static_cast<double>(state.range(0)), opt));
}
BENCHMARK(BM_dinkelbach)->Arg(16)->Arg(64);

void BM_iwfp_sweep(benchmark::State& state) {
  const GameInstance inst = bench_instance(8, 16, 10.0);
  const std::vector<double> gamma(8, 0.0);
  SolverConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(iwfp(inst, gamma, PowerProfile::uniform(inst), cfg));
}
BENCHMARK(BM_iwfp_sweep);

void BM_ncp_solve(benchmark::State& state) {
  const GameInstance inst = bench_instance(4, 8, 10.0);
  SolverConfig cfg;
  cfg.record_profiles = false;
  cfg.max_outer_ncp = 60000;
  for (auto _ : state) benchmark::DoNotOptimize(ncp_solve(inst, cfg));
}
BENCHMARK(BM_ncp_solve);

void BM_spa_solve(benchmark::State& state) {
  const GameInstance inst = bench_instance(4, 8, 10.0);
  SolverConfig cfg;
  cfg.record_profiles = false;
  for (auto _ : state) benchmark::DoNotOptimize(spa_solve(inst, cfg));
}
BENCHMARK(BM_spa_solve);

void BM_analyze(benchmark::State& state) {
  const GameInstance inst = bench_instance(4, 8, 10.0);
  AnalyzeOptions opt;
  opt.sample_count = 50;
  for (auto _ : state) benchmark::DoNotOptimize(analyze(inst, opt));
}
BENCHMARK(BM_analyze);

}  // namespace

BENCHMARK_MAIN();
