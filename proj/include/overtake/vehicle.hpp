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

#ifndef OVERTAKE_VEHICLE_HPP_
#define OVERTAKE_VEHICLE_HPP_

#include "overtake/config.hpp"

namespace overtake {

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double v_cmd = 0.0;
  double delta_cmd = 0.0;
};

struct Command {
  double v = 0.0;
  double delta = 0.0;
};

/// RK4 step of the kinematic bicycle. The commanded speed (clamped at 0) acts
/// through a first-order lag tau_v (tau_v = 0 applies it at once); the
/// steering command is clamped to delta_max and applied directly.
VehicleState step_vehicle(const VehicleState& state, const Command& cmd, double dt,
                          const VehicleParams& params);

/// Oriented rectangle of the vehicle footprint.
struct OrientedBox {
  double cx = 0.0;
  double cy = 0.0;
  double theta = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;
};

OrientedBox footprint(const VehicleState& s, const VehicleParams& params);

/// Separating-axis test; touching boxes count as intersecting.
bool intersects(const OrientedBox& a, const OrientedBox& b);

/// Steering angle that puts the rear axle on a circle through the target
/// point (pure pursuit); the target is given in world coordinates.
double pure_pursuit(const VehicleState& s, double target_x, double target_y,
                    double wheelbase);

}  // namespace overtake

#endif  // OVERTAKE_VEHICLE_HPP_
