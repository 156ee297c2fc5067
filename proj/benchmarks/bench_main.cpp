#include <benchmark/benchmark.h>

#include "friedrichs/critical_point.hpp"
#include "friedrichs/lattice_oracle.hpp"
#include "friedrichs/model.hpp"
#include "friedrichs/quadrature.hpp"
#include "friedrichs/spectral.hpp"

using namespace friedrichs;

namespace {

const DispersionModel& cubic() {
  static const DispersionModel m = model_from_config(builtin_cubic());
  return m;
}

void BM_FindMaximizer(benchmark::State& state) {
  const TorusVector p(0.3, -0.7, 1.1);
  for (auto _ : state) benchmark::DoNotOptimize(find_maximizer(cubic(), p));
}
BENCHMARK(BM_FindMaximizer)->Unit(benchmark::kMillisecond);

// Node construction plus the threshold value, from a cold integrator.
void BM_ThresholdCold(benchmark::State& state) {
  const TorusVector p(0.3, -0.7, 1.1);
  const auto cp = find_maximizer(cubic(), p);
  QuadratureSpec spec;
  spec.grid = static_cast<int>(state.range(0));
  for (auto _ : state) {
    OmegaIntegrator integ(cubic(), p, cp, spec);
    benchmark::DoNotOptimize(integ.omega_offset(0.0));
  }
}
BENCHMARK(BM_ThresholdCold)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// Repeated Omega evaluations on cached nodes at a small offset.
void BM_OmegaWarm(benchmark::State& state) {
  const TorusVector p(0.3, -0.7, 1.1);
  const auto cp = find_maximizer(cubic(), p);
  OmegaIntegrator integ(cubic(), p, cp);
  integ.omega_offset(1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(integ.omega_offset(1e-3));
}
BENCHMARK(BM_OmegaWarm)->Unit(benchmark::kMillisecond);

void BM_SolveEigenvalue(benchmark::State& state) {
  SpectralProblem sp(cubic(), TorusVector(0.3, -0.7, 1.1));
  const double mu = 2.0 * sp.mu_threshold();
  for (auto _ : state) benchmark::DoNotOptimize(sp.solve_eigenvalue(mu));
}
BENCHMARK(BM_SolveEigenvalue)->Unit(benchmark::kMillisecond);

void BM_SecularRoot(benchmark::State& state) {
  const TorusVector p(0.3, -0.7, 1.1);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(secular_root(cubic(), p, 0.05, N));
}
BENCHMARK(BM_SecularRoot)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DenseSpectrum(benchmark::State& state) {
  const TorusVector p(0.3, -0.7, 1.1);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dense_spectrum(cubic(), p, 0.05, N));
}
BENCHMARK(BM_DenseSpectrum)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
