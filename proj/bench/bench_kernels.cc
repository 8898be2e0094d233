// Copyright 2026 The dpspace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "dpspace/algorithms.h"
#include "dpspace/attack.h"
#include "dpspace/fplemma.h"
#include "dpspace/hard_instance.h"

namespace dpspace {
namespace {

void BM_McCorrelationSerial(benchmark::State& state) {
  const ExactMean f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(McCorrelationSerial(f, 50, 200000, Prior::kUniform, 1));
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}

void BM_McCorrelationParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const ExactMean f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(McCorrelation(f, 50, 200000, Prior::kUniform, 1));
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}

struct AttackInput {
  InstanceParams params = DeriveParams(64, 8, 16, 512, Prior::kUniform);
  InstanceRun run;
  AttackConfig cfg;
  AttackInput() {
    ExactCounter exact;
    run = RunInstance(exact, params, 1);
    cfg = DefaultAttackConfig(params.w, params.T);
  }
};

const AttackInput& Input() {
  static const AttackInput input;
  return input;
}

void BM_RoundingAttackSerial(benchmark::State& state) {
  const AttackInput& in = Input();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        RunRoundingAttackSerial(in.run.phases, in.run.support.heavy, in.cfg, 1));
  }
}

void BM_RoundingAttackParallel(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const AttackInput& in = Input();
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunRoundingAttack(in.run.phases, in.run.support.heavy, in.cfg, 1));
  }
}

BENCHMARK(BM_McCorrelationSerial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McCorrelationParallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RoundingAttackSerial)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RoundingAttackParallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dpspace

BENCHMARK_MAIN();
