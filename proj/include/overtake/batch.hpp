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

// Independent work items solved in parallel. Each *_serial twin is the
// reference the parallel kernel must reproduce bit for bit.

#ifndef OVERTAKE_BATCH_HPP_
#define OVERTAKE_BATCH_HPP_

#include <cstdint>
#include <vector>

#include "overtake/ptc_qp.hpp"
#include "overtake/race_sim.hpp"

namespace overtake {

/// Cold-start PTC solve of every problem.
std::vector<QpSolution> solve_batch(const std::vector<DenseQp>& qps, const PtcConfig& cfg);
std::vector<QpSolution> solve_batch_serial(const std::vector<DenseQp>& qps,
                                           const PtcConfig& cfg);

struct TrialJob {
  Scenario scenario;
  std::uint64_t seed = 0;
};

std::vector<TrialResult> run_trials(const std::vector<TrialJob>& jobs, const TrackMap& track,
                                    const SimConfig& config);
std::vector<TrialResult> run_trials_serial(const std::vector<TrialJob>& jobs,
                                           const TrackMap& track, const SimConfig& config);

}  // namespace overtake

#endif  // OVERTAKE_BATCH_HPP_
