#include <benchmark/benchmark.h>

#include "hystloop/loop.hpp"
#include "hystloop/plant.hpp"

namespace {

using namespace hystloop;

void BM_Anhysteretic(benchmark::State& state) {
  const JaParams params{};
  double he = -5.0 * params.a;
  for (auto _ : state) {
    he = -he;
    benchmark::DoNotOptimize(anhysteretic(he, params));
  }
}
BENCHMARK(BM_Anhysteretic);

void BM_JaMajorLoopSweep(benchmark::State& state) {
  const JaParams params{};
  const double h_max = 10.0 * params.a;
  const int points = static_cast<int>(state.range(0));
  for (auto _ : state) {
    JaState st;
    for (int i = 0; i <= points; ++i)
      st = ja_step(st, h_max * i / points, 1e-3, params);
    for (int i = points; i >= -points; --i)
      st = ja_step(st, h_max * i / points, 1e-3, params);
    benchmark::DoNotOptimize(st.b);
  }
  state.SetItemsProcessed(state.iterations() * (3 * points + 2));
}
BENCHMARK(BM_JaMajorLoopSweep)->Arg(256)->Arg(1024);

LoopConfig closed_loop_fixture(PlantType type) {
  LoopConfig cfg;
  cfg.reference.shape = WaveShape::Sine;
  cfg.reference.frequency_hz = type == PlantType::JaDynamic ? 500.0 : 5.0;
  cfg.reference.amplitude = 1.4;
  cfg.reference.periods = 4;
  cfg.reference.samples_per_period = 1000;
  cfg.plant.type = type;
  if (type == PlantType::JaDynamic) cfg.plant.ja.dynamic = JaDynamicParams{0.05, 0.3};
  CtrlParams ctrl;
  ctrl.Kp = 0.02;
  ctrl.Ki = 3000.0;
  cfg.controller = ctrl;
  cfg.init_cycles = 1;
  cfg.measure_periods = 2;
  return cfg;
}

void BM_ClosedLoopJaStatic(benchmark::State& state) {
  const LoopConfig cfg = closed_loop_fixture(PlantType::JaStatic);
  for (auto _ : state) {
    auto result = run_closed_loop(cfg);
    benchmark::DoNotOptimize(result.metrics.ff_vb_percent);
  }
}
BENCHMARK(BM_ClosedLoopJaStatic)->Unit(benchmark::kMillisecond);

void BM_ClosedLoopJaDynamic(benchmark::State& state) {
  const LoopConfig cfg = closed_loop_fixture(PlantType::JaDynamic);
  for (auto _ : state) {
    auto result = run_closed_loop(cfg);
    benchmark::DoNotOptimize(result.metrics.ff_vb_percent);
  }
}
BENCHMARK(BM_ClosedLoopJaDynamic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
