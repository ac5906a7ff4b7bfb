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

#ifndef OVERTAKE_CORRIDOR_HPP_
#define OVERTAKE_CORRIDOR_HPP_

#include <span>
#include <vector>

#include "overtake/sgp.hpp"

namespace overtake {

/// Longitudinal prediction model of the ego for the forward simulation.
struct EgoMotionModel {
  double v_ego = 0.0;     // m/s, current speed
  double a_min = 0.0;     // m/s^2, acceleration at v_max
  double a_max = 3.0;     // m/s^2, acceleration at standstill
  double v_max = 5.5;     // m/s
  double horizon = 4.0;   // s
  double dt = 0.05;       // s
  double l_front = 1.2;   // m, interaction reach ahead of the ego
  double l_rear = 0.6;    // m, interaction reach behind the ego

  /// a(v) = a_max - (a_max - a_min) * clamp(v / v_max, 0, 1).
  double acceleration(double v) const;
};

struct ProfileSample {
  double s_ego = 0.0;   // m, ego arc length (unwrapped)
  double mean_d = 0.0;  // m, opponent lateral mean at arrival
  double var_d = 0.0;   // m^2, opponent lateral variance at arrival
  double t = 0.0;       // s, time since the start of the simulation
};

/// Opponent occupancy sampled along the ego's future arc length inside the
/// interaction window [c_start, c_end].
struct OccupancyProfile {
  int opponent_id = 0;
  std::vector<ProfileSample> samples;
  double c_start = 0.0;
  double c_end = 0.0;
  int dropped = 0;  // samples discarded for non-finite predictions

  bool empty() const { return samples.empty(); }
};

/// Integrates ego and opponent arc length over the horizon and records the
/// opponent's predicted lateral occupancy whenever the signed gap
/// s_opp - s_ego lies strictly inside (-l_rear, l_front). `s_opp0` must be
/// expressed in the same unwrapped frame as `s_ego0`.
OccupancyProfile forward_simulate(const EgoMotionModel& ego, double s_ego0,
                                  const SgpModel& lateral,
                                  const SgpModel& velocity, double s_opp0,
                                  int opponent_id = 0);

struct CorridorParams {
  double w_car = 0.30;            // m
  double w_margin = 0.20;         // m
  double k_sigma = 2.0;
  double w_max = 1.0;             // m
  double dilation_window = 1.0;   // m
  double crossing_speed = 0.3;    // m/s, lateral speed classifying a crossing
  double crossing_margin = 0.5;   // eta in (0, 1)
};

struct OccupancyCorridor {
  OccupancyProfile profile;
  std::vector<double> width;        // W_eff per sample
  std::vector<double> left;         // mean + W/2
  std::vector<double> right;        // mean - W/2
  std::vector<double> left_dilated;
  std::vector<double> right_dilated;
  bool crossing = false;
  double mean_lateral_velocity = 0.0;  // m/s

  double c_start() const { return profile.c_start; }
  double c_end() const { return profile.c_end; }
  bool active_at(double s) const;
  /// Linear interpolation of the dilated bounds; requires active_at(s).
  double left_at(double s) const;
  double right_at(double s) const;
};

/// Variance-inflated, dilated corridor with the crossing bypass applied.
/// Throws ContractError for an empty profile.
OccupancyCorridor build_corridor(const OccupancyProfile& profile,
                                 const CorridorParams& params);

/// Sliding-window max (or min) of `values` over samples within
/// [s_k - window/2, s_k + window/2]; `s` must be sorted ascending.
std::vector<double> dilate(std::span<const double> s,
                           std::span<const double> values, double window,
                           bool take_max);

}  // namespace overtake

#endif  // OVERTAKE_CORRIDOR_HPP_
