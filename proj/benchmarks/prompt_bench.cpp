#include <benchmark/benchmark.h>

#include "parrot/prompt.hpp"

namespace {

parrot::InstructionExample example() {
  return {"Translate the following sentences from Chinese to English.",
          "检查情况显示，市场销售的粮油、肉类、水果、蔬菜、蛋奶等生活必需品供应充足。",
          "A translation with major accuracy/mistranslation errors could be",
          "The results of the inspection indicate the sufficient supply of living necessities <v>on marketing</v>.",
          parrot::InstructionKind::error_guided,
          {}};
}

void BM_RenderTrain(benchmark::State& state) {
  const auto ex = example();
  const parrot::PromptFormat fmt;
  for (auto _ : state) benchmark::DoNotOptimize(parrot::render(ex, fmt, parrot::RenderMode::train));
}
BENCHMARK(BM_RenderTrain);

void BM_ExtractPreferred(benchmark::State& state) {
  const auto response = parrot::join_preferred("The market order remains stable on the whole.",
                                               "The market order is stable on an overall basis.");
  for (auto _ : state) benchmark::DoNotOptimize(parrot::extract_preferred(response));
}
BENCHMARK(BM_ExtractPreferred);

}  // namespace
