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

#ifndef OVERTAKE_RACE_SIM_HPP_
#define OVERTAKE_RACE_SIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "overtake/config.hpp"
#include "overtake/track.hpp"
#include "overtake/vehicle.hpp"

namespace overtake {

enum class PathKind { kRaceline, kCenterline, kShortest, kOffset };

struct OpponentSpec {
  PathKind path = PathKind::kRaceline;
  double offset = 0.0;        // m, lateral offset for kOffset
  double spacing = 20.0;      // m ahead of the ego start
  double speed_scaler = 0.6;  // fraction of the ego raceline speed
};

struct Scenario {
  std::string name = "custom";
  std::vector<OpponentSpec> opponents;
  double ego_s0 = 0.0;        // m
  int stop_overtakes = 5;
};

/// SMP, DSL, TSO or ONT with every opponent at `speed_scaler`. Throws
/// ContractError for an unknown name.
Scenario make_scenario(const std::string& name, const TrackMap& track,
                       double speed_scaler);
const std::vector<std::string>& scenario_names();

/// One control cycle of the ego. Timings are kept out of this record so that
/// a run log is bit-identical across repetitions.
struct CycleRecord {
  int cycle = 0;
  double t = 0.0;
  double s = 0.0;            // unwrapped progress
  double d = 0.0;
  double v = 0.0;
  double v_cmd = 0.0;
  double delta_cmd = 0.0;
  int corridors = 0;
  std::string gap = "-";
  bool blocked = false;
  int switches = 0;
  double d_target = 0.0;
  double v_cap = 0.0;        // speed profile ceiling applied this cycle
  std::string qp_status;
  int qp_iterations = 0;
  double qp_residual = 0.0;
  int relaxed_rows = 0;
  bool fallback = false;     // flagged: solver fallback or planning exception
  std::string fault;         // exception text of a flagged planning failure
  int overtakes = 0;
  int collisions = 0;
  double min_gap = 0.0;      // smallest center distance to an opponent
};

struct CycleTiming {
  double plan_us = 0.0;
  double ptc_us = 0.0;
  double oracle_us = 0.0;    // 0 unless shadow mode
  std::uint64_t fingerprint = 0;
  double ptc_objective = 0.0;
  double oracle_objective = 0.0;
  int ptc_iterations = 0;
};

struct RunMetrics {
  int attempts = 0;
  int successes = 0;
  int collisions = 0;          // collision events (OBB contact onsets)
  double success_rate = 0.0;   // %, R_otc
  double maneuver_time = 0.0;  // s, Sigma T
  double mean_jerk = 0.0;      // m/s^3
  double mean_steering_rate = 0.0;  // rad/s
  double sim_time = 0.0;       // s
  bool complete = false;       // stop rule reached before the timeout
  int fallbacks = 0;           // flagged fallback cycles
  int unflagged_failures = 0;  // cycles without a finite command and no flag
  int cycles = 0;
  int gap_switches = 0;
  int forced_switches = 0;
  double lap_time_ego = 0.0;   // s, unobstructed raceline lap at full speed
};

struct TrialResult {
  Scenario scenario;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<CycleRecord> cycles;
  std::vector<CycleTiming> timings;
  std::vector<std::string> plans;   // per-cycle JSON when requested
  std::vector<DenseQp> harvested;   // condensed QPs when requested
};

struct TrialOptions {
  bool record_plans = false;
  bool harvest_qps = false;
  int harvest_stride = 1;
};

/// Deterministic closed-loop simulation of one trial.
TrialResult run_trial(const Scenario& scenario, const TrackMap& track,
                      const SimConfig& config, std::uint64_t seed,
                      const TrialOptions& options = {});

struct SweepProbe {
  double scaler = 0.0;
  bool success = false;
  std::vector<std::uint64_t> seeds;
};

struct SweepResult {
  std::optional<double> s_max;   // largest all-success scaler; empty: < 40%
  std::vector<SweepProbe> probes;
  int monotonicity_violations = 0;  // flaky probes logged by the sweep
};

/// Binary search of the opponent speed scaler over [lo, hi]; a probe passes
/// when all `trials` runs complete without a collision.
SweepResult sweep_smax(const Scenario& scenario, const TrackMap& track,
                       const SimConfig& config, std::uint64_t seed, int trials = 3,
                       double lo = 0.4, double hi = 0.99, int iterations = 6);

void write_cycles_csv(std::ostream& out, const std::vector<CycleRecord>& cycles);
void write_timing_csv(std::ostream& out, const std::vector<CycleTiming>& timings);
std::string metrics_to_json(const TrialResult& result);

}  // namespace overtake

#endif  // OVERTAKE_RACE_SIM_HPP_
