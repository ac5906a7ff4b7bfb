// Copyright 2026 The overtake Authors
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

// Parallel batch kernels against their serial twins.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "overtake/batch.hpp"
#include "overtake/qp.hpp"
#include "overtake/track.hpp"

namespace {

using namespace overtake;

std::vector<DenseQp> qp_set() {
  std::mt19937_64 rng(7);
  std::vector<DenseQp> qps;
  for (int i = 0; i < 64; ++i) qps.push_back(random_qp(rng, RandomQpSpec{}));
  return qps;
}

const TrackMap& track() {
  static const TrackMap t = load_track(std::string(OVERTAKE_SOURCE_DIR) + "/data/tracks/default.csv");
  return t;
}

std::vector<TrialJob> trial_set() {
  std::vector<TrialJob> jobs;
  for (const char* name : {"SMP", "DSL", "TSO", "ONT"}) {
    jobs.push_back({make_scenario(name, track(), 0.6), 1});
  }
  return jobs;
}

SimConfig short_config() {
  SimConfig c;
  c.sim.timeout = 5.0;
  return c;
}

void BM_SolveBatch(benchmark::State& state) {
  const auto qps = qp_set();
  for (auto _ : state) benchmark::DoNotOptimize(solve_batch(qps, PtcConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(qps.size()));
}

void BM_SolveBatchSerial(benchmark::State& state) {
  const auto qps = qp_set();
  for (auto _ : state) benchmark::DoNotOptimize(solve_batch_serial(qps, PtcConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(qps.size()));
}

void BM_RunTrials(benchmark::State& state) {
  const auto jobs = trial_set();
  const SimConfig cfg = short_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(jobs, track(), cfg));
}

void BM_RunTrialsSerial(benchmark::State& state) {
  const auto jobs = trial_set();
  const SimConfig cfg = short_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_trials_serial(jobs, track(), cfg));
}

}  // namespace

BENCHMARK(BM_SolveBatch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunTrials)->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK(BM_RunTrialsSerial)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
