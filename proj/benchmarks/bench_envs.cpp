#include <benchmark/benchmark.h>

#include "farm/runner.hpp"

using namespace farm;

namespace {

const TimeSeriesYear& year() {
  static const TimeSeriesYear y = generate_synthetic(SyntheticSpec{});
  return y;
}

// Random actions over whole training episodes.
void run_env(benchmark::State& state, EnvKind kind, AgentKind agent) {
  const auto config = RunConfig::defaults(kind, agent);
  auto env = make_env(config, year());
  Rng rng(7);
  env->reset(rng);
  for (auto _ : state) {
    auto out = env->step(rng.below(env->action_count()));
    if (out.done) env->reset(rng);
    benchmark::DoNotOptimize(out.reward);
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_BatteryStep(benchmark::State& state) { run_env(state, EnvKind::battery, AgentKind::ppo); }
void BM_HeaterStep(benchmark::State& state) { run_env(state, EnvKind::heater, AgentKind::ppo); }
void BM_HeaterForecastStep(benchmark::State& state) {
  run_env(state, EnvKind::heater, AgentKind::fppo);
}

BENCHMARK(BM_BatteryStep);
BENCHMARK(BM_HeaterStep);
BENCHMARK(BM_HeaterForecastStep);

void BM_MakeHeaterForecastEnv(benchmark::State& state) {
  const auto config = RunConfig::defaults(EnvKind::heater, AgentKind::fppo);
  for (auto _ : state) benchmark::DoNotOptimize(make_env(config, year()));
}
BENCHMARK(BM_MakeHeaterForecastEnv)->Unit(benchmark::kMillisecond);

}  // namespace
