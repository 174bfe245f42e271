#include <benchmark/benchmark.h>

#include "farm/runner.hpp"

using namespace farm;

namespace {

const TimeSeriesYear& year() {
  static const TimeSeriesYear y = generate_synthetic(SyntheticSpec{});
  return y;
}

// One default-size rollout plus its update, per iteration.
void train_one_rollout(benchmark::State& state, EnvKind kind, AgentKind agent) {
  auto config = RunConfig::defaults(kind, agent);
  const long steps = static_cast<long>(state.range(0));
  config.steps = steps;
  config.dqn.learning_starts = 256;
  auto env = make_env(config, year());
  for (auto _ : state) {
    auto policy = make_policy(config, year(), *env, 1);
    benchmark::DoNotOptimize(policy->train(*env, {}));
  }
  state.SetItemsProcessed(state.iterations() * steps);
}

void BM_TrainBatteryPpo(benchmark::State& state) {
  train_one_rollout(state, EnvKind::battery, AgentKind::ppo);
}
void BM_TrainHeaterFppo(benchmark::State& state) {
  train_one_rollout(state, EnvKind::heater, AgentKind::fppo);
}
void BM_TrainHeaterDqn(benchmark::State& state) {
  train_one_rollout(state, EnvKind::heater, AgentKind::dqn);
}

BENCHMARK(BM_TrainBatteryPpo)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainHeaterFppo)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainHeaterDqn)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
