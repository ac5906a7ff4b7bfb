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

#ifndef OVERTAKE_CONFIG_HPP_
#define OVERTAKE_CONFIG_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "overtake/gap_planner.hpp"
#include "overtake/ltv_mpc.hpp"
#include "overtake/ptc_qp.hpp"
#include "overtake/sgp.hpp"
#include "overtake/track.hpp"

namespace overtake {

/// Bad or unknown configuration key, unreadable config file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleParams {
  double length = 0.50;     // m
  double width = 0.30;      // m, W_car
  double wheelbase = 0.33;  // m
  double tau_v = 0.10;      // s, first-order speed lag
  double delta_max = 0.40;  // rad
};

enum class TrackingMode { kMpc, kPurePursuit };

struct ControllerParams {
  TrackingMode tracking = TrackingMode::kMpc;
  double pp_lookahead_min = 0.6;   // m
  double pp_lookahead_gain = 0.25; // s, lookahead = max(min, gain * v)
  // Following distance keeping behind opponents in the ego's lane.
  double acc_range = 6.0;          // m
  double acc_min_gap = 0.9;        // m, center to center
  double acc_time_gap = 0.25;      // s
  double acc_gain = 1.5;           // 1/s
  double lane_clearance = 0.45;    // m, lateral distance that counts as in lane
  double v_min = 0.15;             // m/s, floor of the speed profile
};

struct OpponentParams {
  double lookahead_min = 0.6;   // m
  double lookahead_gain = 0.3;  // s
};

struct SimParams {
  double dt = 0.01;              // s, integration step
  double cycle = 0.05;           // s, planner and MPC period
  double timeout = 300.0;        // s
  int stop_overtakes = 5;
  double hold_time = 2.0;        // s, an overtake must hold this long
  double attempt_range = 3.0;    // m behind an opponent that opens an attempt
  double clear_tolerance = 0.05; // m, |d - d_rl| that ends the maneuver timer
  double noise_pos = 0.02;       // m
  double noise_vel = 0.05;       // m/s
  bool shadow = false;           // oracle solve on every MPC problem
};

struct SimConfig {
  std::string track = "data/tracks/default.csv";
  SimParams sim{};
  VehicleParams vehicle{};
  SpeedLimits speed{};
  TrackerConfig tracker{};
  PlannerParams planner{};
  MpcParams mpc{};
  PtcConfig ptc{};
  ControllerParams controller{};
  OpponentParams opponents{};
  double opponent_speed = 0.6;   // default speed scaler of the scenarios
};

/// Full default configuration as pretty-printed JSON.
std::string dump_config(const SimConfig& cfg);
/// Parses JSON over the defaults; every key must exist in the default
/// schema. Throws ConfigError naming the offending key.
SimConfig parse_config(const std::string& text);
/// Reads a config file; throws ConfigError naming the path if unreadable.
SimConfig load_config(const std::filesystem::path& path);

/// Keeps derived fields consistent (MPC car width and limits follow the
/// vehicle, the tracker follows the track length, ...).
void finalize(SimConfig& cfg, const TrackMap& track);

}  // namespace overtake

#endif  // OVERTAKE_CONFIG_HPP_
