#include <benchmark/benchmark.h>

#include "farm/neural/gru.hpp"

using namespace farm;
using namespace farm::nn;

namespace {

std::vector<Matrix> random_sequence(Index steps, Index inputs, Index batch, Rng& rng) {
  std::vector<Matrix> seq(static_cast<std::size_t>(steps), Matrix(inputs, batch));
  for (auto& m : seq)
    for (Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  return seq;
}

void BM_GruEncode(benchmark::State& state) {
  Rng rng(1);
  Gru gru("gru", GruSpec{2, 32, 0.1});
  gru.init(rng);
  const auto seq = random_sequence(24, 2, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(gru.encode(seq, false, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GruEncode)->Arg(1)->Arg(128);

void BM_GruBackward(benchmark::State& state) {
  Rng rng(2);
  Gru gru("gru", GruSpec{2, 32, 0.1});
  gru.init(rng);
  const auto seq = random_sequence(24, 2, state.range(0), rng);
  const Matrix d_out = Matrix::Ones(32, state.range(0));
  for (auto _ : state) {
    Gru::Cache cache;
    gru.encode(seq, true, &rng, &cache);
    benchmark::DoNotOptimize(gru.backward(cache, d_out));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GruBackward)->Arg(128);

}  // namespace
