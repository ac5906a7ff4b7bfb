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

#ifndef OVERTAKE_GAP_PLANNER_HPP_
#define OVERTAKE_GAP_PLANNER_HPP_

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "overtake/corridor.hpp"
#include "overtake/track.hpp"

namespace overtake {

enum class GapKind { kRight, kMiddle, kLeft, kFullTrack };

/// Stable identity of a topological gap across samples and cycles. Middle
/// gaps are named by the opponents bounding them from below and above.
struct GapId {
  GapKind kind = GapKind::kFullTrack;
  int lower_id = -1;
  int upper_id = -1;

  bool operator==(const GapId&) const = default;
  std::string str() const;
};

struct GapCandidate {
  GapId id;
  std::vector<double> s;       // samples at which the gap exists
  std::vector<double> lower;   // free lateral interval after clearances
  std::vector<double> upper;
  double min_width = 0.0;
  double span_start = 0.0;
  double span_end = 0.0;

  double width(std::size_t k) const { return upper[k] - lower[k]; }
  double center(std::size_t k) const { return 0.5 * (lower[k] + upper[k]); }
  /// Mean of the per-sample centers; the d_center(g) of the cost.
  double mean_center() const;
};

struct GapParams {
  int samples = 40;          // N_s
  double eps_side = 0.05;    // m
  double eps_mid = 0.05;     // m
  double w_min = 0.40;       // m, W_car + 0.1
  double w_s = 1.0;
  double w_r = 0.5;
  double w_c = 1.0;
  double c0 = 0.3;
  double c1 = 0.7;
  double alpha = 0.15;
  double t_dwell = 0.6;      // s
};

/// Every gap found on the N_s samples, passable or not. With no corridors the
/// single FullTrack gap over the whole cross-section is returned.
std::vector<GapCandidate> measure_gaps(
    const std::vector<OccupancyCorridor>& corridors, const TrackMap& track,
    const GapParams& params);

/// Passable subset of measure_gaps (min_width strictly above w_min).
std::vector<GapCandidate> enumerate_gaps(
    const std::vector<OccupancyCorridor>& corridors, const TrackMap& track,
    const GapParams& params);

struct GapDecision {
  std::optional<GapId> active;
  std::optional<GapId> previous;
  double active_center = 0.0;   // d_center of the active gap when chosen
  double d_target = 0.0;        // m
  double cost = 0.0;            // J of the active gap at the last update
  double last_switch_time = -std::numeric_limits<double>::infinity();
  int switches = 0;             // gated switches between two gaps
  int forced_switches = 0;      // active gap vanished from the passable set
  bool blocked = false;
  bool switched = false;        // set on the cycle a switch happened

  double dwell_elapsed(double t_now) const { return t_now - last_switch_time; }
};

/// C_switch of Eq. (12) for `g` relative to the active gap of `d`.
double switch_cost(const GapCandidate& g, const GapDecision& d,
                   const GapParams& params);
/// J(g) = w_s / min W + w_r |d_center - d_rl| + w_c C_switch.
double gap_cost(const GapCandidate& g, const GapDecision& d, double d_rl,
                const GapParams& params);

/// Hysteresis- and dwell-gated choice. Candidates must be passable. An empty
/// list keeps the previous decision with `blocked` set. `d_target` is not
/// computed here (see target_offset).
GapDecision select_gap(const std::vector<GapCandidate>& candidates,
                       const GapDecision& previous, double d_rl, double t_now,
                       const GapParams& params);

/// Lateral target inside a gap for a car of width `w_car`: the mean gap
/// center clamped to the interval common to all samples.
double target_offset(const GapCandidate& g, double w_car);

enum class ReferenceKind { kRaceline, kThreePhase, kHold };

/// Sampled lateral reference d_ref(s) over [s_0, s_end()].
struct ReferencePath {
  ReferenceKind kind = ReferenceKind::kRaceline;
  double s0 = 0.0;
  double ds = 0.05;
  std::vector<double> d;
  double c_start = 0.0;
  double c_end = 0.0;
  double s_final = 0.0;
  double d_target = 0.0;
  int clipped = 0;  // samples moved by the track-boundary clip

  bool empty() const { return d.empty(); }
  double s_end() const { return s0 + ds * static_cast<double>(d.size() - 1); }
  /// Linear interpolation; clamps outside the sampled range.
  double operator()(double s) const;
  double slope(double s) const;
};

struct ReferenceParams {
  double gamma1 = 0.35;
  double gamma2 = 0.88;
  double exit_length = 4.0;    // s_final - c_end, m
  double merge_length = 4.0;   // raceline merge when no gap is active, m
  double extent = 12.0;        // sampled length ahead of s_0, m
  double step = 0.05;          // m
  double w_car = 0.30;         // m
};

/// Three-phase reference: cubic Bezier entry in (s, d) up to c_start,
/// constant d_target to c_end, raceline-relative cosine exit to s_final,
/// raceline afterwards, clipped to the track minus half a car width.
ReferencePath synthesize_reference(double d_target, double d0, double s0,
                                   double c_start, double c_end,
                                   const TrackMap& track,
                                   const ReferenceParams& params);

/// Cosine blend from d0 back onto the raceline over merge_length.
ReferencePath raceline_reference(double d0, double s0, const TrackMap& track,
                                 const ReferenceParams& params);

/// Constant-offset reference used when no passable gap exists.
ReferencePath hold_reference(double d0, double s0, const TrackMap& track,
                             const ReferenceParams& params);

/// One opponent as seen by the planner. `s` is unwrapped relative to the
/// ego (s_ego + periodic delta).
struct OpponentView {
  int id = 0;
  const SgpModel* lateral = nullptr;
  const SgpModel* velocity = nullptr;
  double s = 0.0;
  double d = 0.0;
  double v = 0.0;
};

struct PlannerParams {
  EgoMotionModel ego{};
  CorridorParams corridor{};
  GapParams gaps{};
  ReferenceParams reference{};
};

struct PlanInput {
  double t = 0.0;
  double s_ego = 0.0;
  double d_ego = 0.0;
  double v_ego = 0.0;
  double v_max = 5.5;  // ego speed ceiling for the forward simulation
  std::vector<OpponentView> opponents;
};

struct PlanOutput {
  ReferencePath reference;
  GapDecision decision;
  std::vector<OccupancyCorridor> corridors;
  std::vector<GapCandidate> gaps;        // all measured gaps
  std::vector<double> gap_costs;         // J per entry of `gaps` (NaN if impassable)
  std::optional<GapCandidate> chosen;    // geometry of the active gap
  std::optional<int> lead_id;            // opponent to follow when blocked
  double window_start = 0.0;             // union of interaction windows
  double window_end = 0.0;
};

/// Corridor construction, gap identification, gap selection and reference
/// synthesis for one planning cycle. Pure in its arguments.
PlanOutput plan(const TrackMap& track, const PlanInput& input,
                const GapDecision& previous,
                const ReferencePath& previous_reference,
                const PlannerParams& params);

/// One JSON object describing the cycle (candidates, costs, decision,
/// reference samples every `stride` points).
std::string plan_to_json(const PlanOutput& out, double t, int stride = 10);

}  // namespace overtake

#endif  // OVERTAKE_GAP_PLANNER_HPP_
