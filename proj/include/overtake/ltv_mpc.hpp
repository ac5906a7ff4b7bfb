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

#ifndef OVERTAKE_LTV_MPC_HPP_
#define OVERTAKE_LTV_MPC_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

#include "overtake/flat_traj.hpp"
#include "overtake/gap_planner.hpp"
#include "overtake/ptc_qp.hpp"
#include "overtake/qp.hpp"
#include "overtake/track.hpp"

namespace overtake {

struct MpcParams {
  int horizon = 20;                      // N
  double dt = 0.05;                      // s
  Eigen::Vector3d q_diag{1.0, 10.0, 2.0};  // (s, d, dtheta)
  Eigen::Vector2d r_diag{0.5, 2.0};        // (v, delta)
  double v_max = 7.0;                    // m/s
  double delta_max = 0.4;                // rad
  double wheelbase = 0.33;               // m
  double w_car = 0.30;                   // m
};

using Matrix32d = Eigen::Matrix<double, 3, 2>;

struct StepJacobian {
  Eigen::Matrix3d A;
  Matrix32d B;
};

/// Frenet kinematic bicycle, x = (s, d, dtheta), u = (v, delta).
Eigen::Vector3d frenet_rate(const TrackMap& track, const Eigen::Vector3d& x,
                            const Eigen::Vector2d& u, double wheelbase);
/// Forward-Euler step x + dt f(x, u).
Eigen::Vector3d frenet_step(const TrackMap& track, const Eigen::Vector3d& x,
                            const Eigen::Vector2d& u, double dt, double wheelbase);

/// Analytic Jacobians of frenet_step at each of the N reference pairs.
/// Throws GeometryError when 1 - d kappa <= 0 at a reference point.
std::vector<StepJacobian> linearize(const TrackMap& track,
                                    const ReferenceStatesInputs& ref);

/// Lateral bounds on the predicted d at steps 1..N.
struct LateralBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  int corridor_steps = 0;  // steps bounded by a gap rather than the track
};

/// Track bounds shrunk by half a car width, intersected with the chosen gap
/// (itself built from the dilated corridors) where the gap is sampled.
LateralBounds lateral_bounds(const TrackMap& track, const ReferenceStatesInputs& ref,
                             const GapCandidate* gap, double w_car);

struct MpcProblem {
  MpcParams params;
  ReferenceStatesInputs ref;
  std::vector<StepJacobian> jacobians;
  LateralBounds bounds;
};

/// Condensed problem over z = (v_0, delta_0, ..., v_{N-1}, delta_{N-1}).
/// Predicted states: X = X_ref + S_x dx0 + S_u (z - U_ref).
struct CondensedMpc {
  DenseQp qp;
  Eigen::MatrixXd s_x;     // 3N x 3
  Eigen::MatrixXd s_u;     // 3N x 2N
  Eigen::VectorXd x_ref;   // 3N, states 1..N
  Eigen::VectorXd u_ref;   // 2N
  Eigen::Vector3d dx0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  int relaxed_rows = 0;    // lateral bounds moved into the reachable range
};

/// Row layout of the condensed constraints: N lateral rows (d_1..d_N), then
/// the 2N actuation boxes. `x0` is unwrapped near the reference s.
CondensedMpc condense(const MpcProblem& problem, const FrenetState& x0,
                      double track_length);

struct MpcSolution {
  Eigen::VectorXd u;                  // 2N
  std::vector<FrenetState> x_pred;    // N + 1, starting at x0
  double v_cmd = 0.0;
  double delta_cmd = 0.0;
  QpSolution ptc;
  bool fallback = false;
  std::uint64_t fingerprint = 0;
  double ptc_time_us = 0.0;
  std::optional<QpSolution> oracle;   // shadow mode only
  std::uint64_t oracle_fingerprint = 0;
  double oracle_time_us = 0.0;
};

/// Solves with `solver`; in shadow mode the oracle solves an identical copy
/// of the problem and only its timing and objective are reported.
MpcSolution solve_mpc(const CondensedMpc& mpc, PtcSolver& solver, bool shadow,
                      const OracleConfig& oracle_cfg = {});

}  // namespace overtake

#endif  // OVERTAKE_LTV_MPC_HPP_
