// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/data_io.hpp"
#include "kle/kle_engine.hpp"
#include "kle/vector_field.hpp"

#include "support/mortality_fixture.hpp"
#include "support/oracle.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <string>
#include <vector>

namespace {

const std::string& fixture_text() {
  static const std::string text = kle::testing::mortality_fixture_csv();
  return text;
}

const kle::Ensemble& fixture_ensemble() {
  static const kle::Ensemble ens =
      kle::table_to_ensemble(kle::parse_mortality_csv(fixture_text(), std::nullopt, kle::Transform::Log1p));
  return ens;
}

void BM_ParseMortality(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kle::parse_mortality_csv(fixture_text()));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * fixture_text().size()));
}
BENCHMARK(BM_ParseMortality)->Unit(benchmark::kMillisecond);

void BM_DecomposeMortality(benchmark::State& state) {
  const kle::Ensemble& ens = fixture_ensemble();
  for (auto _ : state) benchmark::DoNotOptimize(kle::decompose(ens));
}
BENCHMARK(BM_DecomposeMortality)->Unit(benchmark::kMillisecond);

void BM_CompareMortality(benchmark::State& state) {
  const kle::Ensemble& ens = fixture_ensemble();
  const std::vector<std::size_t> r0{1, 2, 3, 4, 5, 6};
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(kle::compare(ens, r0, kle::kDefaultRankTol, parallel));
}
BENCHMARK(BM_CompareMortality)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

// Square N x d ensembles with a dense Gram.
void BM_DecomposeDense(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  kle::testing::Generator gen(1);
  const kle::Ensemble ens = gen.ensemble(gen.space(kle::GramKind::Dense, d), d);
  for (auto _ : state) benchmark::DoNotOptimize(kle::decompose(ens));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecomposeDense)->RangeMultiplier(2)->Range(16, 256)->Complexity()->Unit(benchmark::kMillisecond);

void BM_Synth(benchmark::State& state) {
  std::vector<double> spectrum(20);
  std::iota(spectrum.rbegin(), spectrum.rend(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kle::synth_ensemble(7, 100, 5, 111, spectrum, 0.5));
}
BENCHMARK(BM_Synth)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
