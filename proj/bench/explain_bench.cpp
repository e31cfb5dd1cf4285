// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

// Serial against OpenMP kernels on one Isolation Forest workload.

#include <benchmark/benchmark.h>

#include "acmead/aggregate.hpp"
#include "acmead/detectors.hpp"
#include "acmead/explainer.hpp"
#include "acmead/shapref.hpp"
#include "acmead/synth.hpp"

namespace {

using namespace acmead;

struct Fixture {
  Dataset data = generate({4900, 100, 20, 0, 4.0, 1});
  Detector model = Detector::fit(data, "iforest", 0.02, 1);
  QuantileGrid grid = build_quantile_grid(data, kDefaultQuantileLevels);
  Dataset background = sample_background(data, 0.05, 1);
  std::size_t row = data.rows() - 1;
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::parallel : Execution::serial;
}

void BM_Explain(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(explain(f.model, f.data.row(f.row), f.grid, Weights{},
                                     f.model.threshold(), mode(state)));
  }
}
BENCHMARK(BM_Explain)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_Overall(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(overall_importance(f.model, f.data, f.grid, Weights{},
                                                f.model.threshold(), 0, mode(state)));
  }
}
BENCHMARK(BM_Overall)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_KernelShap(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_shap(f.model, f.data.row(f.row), f.background, 512, 1,
                                         mode(state)));
  }
}
BENCHMARK(BM_KernelShap)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ScoreAll(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(score_all(f.model, f.data, mode(state)));
}
BENCHMARK(BM_ScoreAll)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
