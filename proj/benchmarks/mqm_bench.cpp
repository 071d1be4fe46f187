#include <benchmark/benchmark.h>

#include "parrot/mqm.hpp"

namespace {

void BM_SplitMarkup(benchmark::State& state) {
  const std::string marked =
      "The results of the <v>inspection</v> indicate the sufficient supply of living necessities <v>on marketing</v> "
      "including cereals and oils, meat, fruits, vegetables, eggs and milk, and the <v>basically stabilized</v> price.";
  for (auto _ : state) benchmark::DoNotOptimize(parrot::mqm::split_markup(marked));
}
BENCHMARK(BM_SplitMarkup);

}  // namespace
