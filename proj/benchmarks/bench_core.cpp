#include <benchmark/benchmark.h>

#include "bqlab/evolution.hpp"
#include "bqlab/modulation.hpp"
#include "bqlab/soliton.hpp"
#include "bqlab/spectrum.hpp"

using namespace bqlab;

static void BM_SpectralDerivative(benchmark::State& state) {
  auto g = make_grid(40.0, static_cast<int>(state.range(0)));
  SolitonParams s{1.0, 0.5, 0.0};
  Eigen::ArrayXd f = profile(s, g->x());
  for (auto _ : state)
    benchmark::DoNotOptimize(spectral_derivative(*g, f, 2));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpectralDerivative)->Arg(512)->Arg(1024)->Arg(2048);

static void BM_Step(benchmark::State& state) {
  auto g = make_grid(50.0, static_cast<int>(state.range(0)));
  SolitonFamily fam = SolitonFamily::make(1.0, {SolitonParams{1.0, 0.5, 0.0}});
  FieldState s = soliton_sum(fam, g, 0.0);
  EvolveConfig cfg;
  cfg.dt = 2e-3;
  cfg.nonlinearity_p = 1.0;
  for (auto _ : state) {
    s = step(s, cfg);
    benchmark::DoNotOptimize(s.u1.data());
  }
}
BENCHMARK(BM_Step)->Arg(512)->Arg(1024)->Arg(2048);

static void BM_Modulate(benchmark::State& state) {
  SolitonFamily fam = SolitonFamily::make(
      1.0, {SolitonParams{1.0, -0.4, -8.0}, SolitonParams{1.0, 0.4, 8.0}});
  auto g = make_grid(60.0, 1024);
  SolitonFamily truth = fam;
  truth.solitons[0].omega += 1e-3;
  FieldState st = soliton_sum(truth, g, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(modulate(st, fam, ModulationMode::subcritical));
}
BENCHMARK(BM_Modulate);

static void BM_CertifySpectrum(benchmark::State& state) {
  auto g = make_grid(30.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    OperatorAssembly A = assemble_linearized(1.0, 0.3, g);
    benchmark::DoNotOptimize(certify_spectrum(A));
  }
}
BENCHMARK(BM_CertifySpectrum)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
