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

#include "overtake/batch.hpp"

#include <exception>

namespace overtake {

std::vector<QpSolution> solve_batch_serial(const std::vector<DenseQp>& qps,
                                           const PtcConfig& cfg) {
  std::vector<QpSolution> out;
  out.reserve(qps.size());
  for (const DenseQp& qp : qps) {
    PtcSolver solver(cfg);
    out.push_back(solver.solve(qp));
  }
  return out;
}

std::vector<QpSolution> solve_batch(const std::vector<DenseQp>& qps, const PtcConfig& cfg) {
  std::vector<QpSolution> out(qps.size());
  const auto n = static_cast<long>(qps.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    PtcSolver solver(cfg);
    out[static_cast<std::size_t>(i)] = solver.solve(qps[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<TrialResult> run_trials_serial(const std::vector<TrialJob>& jobs,
                                           const TrackMap& track, const SimConfig& config) {
  std::vector<TrialResult> out;
  out.reserve(jobs.size());
  for (const TrialJob& job : jobs) out.push_back(run_trial(job.scenario, track, config, job.seed));
  return out;
}

std::vector<TrialResult> run_trials(const std::vector<TrialJob>& jobs, const TrackMap& track,
                                    const SimConfig& config) {
  std::vector<TrialResult> out(jobs.size());
  std::exception_ptr error;
  const auto n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      const TrialJob& job = jobs[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = run_trial(job.scenario, track, config, job.seed);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace overtake
