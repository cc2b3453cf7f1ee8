// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <apirec/encoder.hpp>
#include <apirec/model.hpp>

#include "synthetic.hpp"

namespace apirec::bench {
namespace {

void BM_EncoderForward(benchmark::State& state) {
  const auto ckpt = synthetic_checkpoint(ModelTask::Matcher, 1);
  const auto vocab = synthetic_vocab();
  std::mt19937_64 rng(3);
  const auto seq = frame_single(random_pieces(rng, static_cast<std::size_t>(state.range(0)) - 2), *vocab,
                                static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward<float>(ckpt.meta.encoder, ckpt.tensors, seq));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EncoderForward)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_FilterScores(benchmark::State& state) {
  const auto vocab = synthetic_vocab();
  const FilterModel filter(
      std::make_shared<const Checkpoint>(synthetic_checkpoint(ModelTask::FilterApi, 1000)), vocab);
  std::mt19937_64 rng(4);
  const auto query = random_pieces(rng, 40);
  for (auto _ : state) benchmark::DoNotOptimize(filter.scores(query));
}
BENCHMARK(BM_FilterScores);

}  // namespace
}  // namespace apirec::bench
