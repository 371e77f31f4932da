// Serial reference versus OpenMP kernels for the two embarrassingly parallel
// workloads: the (Omega, delta) sweep and the per-frequency spectrum.

#include <benchmark/benchmark.h>

#include "cptsq/optimizer.hpp"
#include "cptsq/spectra.hpp"

using namespace cptsq;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_Sweep(benchmark::State& state) {
  ScanOptions o;
  o.execution = mode(state);
  o.base.xi_steps = 500;
  o.propagation.refine = false;
  const Axis w{0.6, 1.6, 6, false}, d{0.005, 0.04, 6, true};
  for (auto _ : state) {
    const SweepMap m = sweep_map(300, w, d, DetuningSetting::symmetric, o);
    benchmark::DoNotOptimize(m.cells.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_Spectrum(benchmark::State& state) {
  SystemParams p = make_params({}, 300, 1.0, 0.019, DetuningSetting::symmetric);
  std::vector<double> grid(64);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = 0.0025 * k;
  SpectrumOptions o;
  o.execution = mode(state);
  for (auto _ : state) {
    const SpectrumResult r = squeezing_spectrum(p, grid, o);
    benchmark::DoNotOptimize(r.s.data());
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Spectrum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
