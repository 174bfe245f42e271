#include <benchmark/benchmark.h>

#include "farm/metrics.hpp"
#include "farm/rng.hpp"

using namespace farm;

namespace {

void BM_Wilcoxon(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> diffs(static_cast<std::size_t>(state.range(0)));
  for (auto& d : diffs) d = rng.normal(0.2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(diffs));
}
BENCHMARK(BM_Wilcoxon)->Arg(11)->Arg(25)->Arg(303);

}  // namespace
