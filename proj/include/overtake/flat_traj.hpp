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

#ifndef OVERTAKE_FLAT_TRAJ_HPP_
#define OVERTAKE_FLAT_TRAJ_HPP_

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "overtake/gap_planner.hpp"
#include "overtake/track.hpp"

namespace overtake {

/// Speed below which the curvature (and steering) of a flat trajectory is
/// not recovered.
class FlatnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quintic flat outputs x(t), y(t) on [0, T]; coefficients in powers of t.
struct FlatTrajectory {
  std::array<double, 6> cx{};
  std::array<double, 6> cy{};
  double duration = 0.0;
  double v_floor = 0.1;

  /// Derivative `order` (0..5) of each axis at time t.
  double x(double t, int order = 0) const;
  double y(double t, int order = 0) const;
};

/// Everything the kinematic bicycle needs at one instant of a flat trajectory.
struct FlatSample {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double kappa = 0.0;
  double delta = 0.0;
};

/// theta, v, kappa and delta = atan(L_wb kappa). Throws FlatnessError when
/// the speed is below the trajectory's v_floor.
FlatSample flat_sample(const FlatTrajectory& traj, double t, double wheelbase);

struct QuinticFitOptions {
  double v_floor = 0.1;     // m/s
  int samples = 41;         // least-squares samples over [0, T]
  double ds_integrate = 0.02;  // m, step of the time-allocation integral
};

/// Samples `path` in s from path.s0, allocates time by integrating
/// ds / v_profile(s), maps to Cartesian and fits one quintic per axis in the
/// least-squares sense with position and velocity clamped at both ends.
/// Throws ContractError when T_plan <= 0 or v_profile <= v_floor on the path.
FlatTrajectory fit_quintic(const ReferencePath& path, const TrackMap& track,
                           const std::function<double(double)>& v_profile,
                           double t_plan, const QuinticFitOptions& options = {});

struct ActuationLimits {
  double v_max = 7.0;      // m/s
  double delta_max = 0.4;  // rad
};

struct ReferenceStatesInputs {
  std::vector<FrenetState> x_ref;  // N + 1 states at t = k dt
  std::vector<double> v_ref;       // N inputs
  std::vector<double> delta_ref;   // N inputs
  double wheelbase = 0.33;
  double dt = 0.05;
  int clip_events = 0;             // inputs moved onto the actuation limits
};

/// Differential-flatness recovery on the grid k dt, k = 0..N. States are
/// projected to the Frenet frame near `s_hint`. Throws FlatnessError when
/// the speed falls below v_floor at a grid point.
ReferenceStatesInputs recover_states(const FlatTrajectory& traj,
                                     const TrackMap& track, double wheelbase,
                                     double dt, int horizon,
                                     const ActuationLimits& limits,
                                     double s_hint);

}  // namespace overtake

#endif  // OVERTAKE_FLAT_TRAJ_HPP_
