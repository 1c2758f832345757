#include <benchmark/benchmark.h>

#include "qtp/scalar_toa.hpp"
#include "qtp/toa_engine.hpp"

namespace {

struct Setup {
  qtp::WavePacket psi;
  qtp::QuadraticForm form;
  qtp::Grid1D t;
  double L = 200.0;

  explicit Setup(std::size_t n)
      : psi(qtp::WavePacket::gaussian(10.0, 1.0, 1.0, qtp::Grid1D(5.0, 15.0, n))),
        form(qtp::quadratic_form(psi.density(), 1.0)),
        t(qtp::default_time_window(psi, L, 1024)) {}
};

void BM_parallel(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qtp::evaluate_parallel(s.form, s.t, s.L));
}

void BM_reference(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qtp::evaluate_reference(s.form, s.t, s.L));
}

void BM_oracle(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  const qtp::Grid1D t(s.t.min(), s.t.max(), 64);
  const qtp::DetectionKernel K = qtp::ExpDecay{1.0, 0.05, 0.02};
  for (auto _ : state)
    benchmark::DoNotOptimize(qtp::conditioned_density(s.psi, K, t, s.L, {qtp::Engine::Oracle, false}));
}

}  // namespace

BENCHMARK(BM_parallel)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_reference)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_oracle)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
