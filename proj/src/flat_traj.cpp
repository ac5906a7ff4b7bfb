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

#include "overtake/flat_traj.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "overtake/common.hpp"

namespace overtake {
namespace {

double poly(const std::array<double, 6>& c, double t, int order) {
  double acc = 0.0;
  for (int k = 5; k >= order; --k) {
    double coeff = c[static_cast<std::size_t>(k)];
    for (int j = 0; j < order; ++j) coeff *= static_cast<double>(k - j);
    acc = acc * t + coeff;
  }
  return acc;
}

Eigen::Vector2d path_point(const ReferencePath& path, const TrackMap& track,
                           double s) {
  const Pose2 p = track.to_cartesian({s, path(s), 0.0});
  return {p.x, p.y};
}

}  // namespace

double FlatTrajectory::x(double t, int order) const { return poly(cx, t, order); }
double FlatTrajectory::y(double t, int order) const { return poly(cy, t, order); }

FlatSample flat_sample(const FlatTrajectory& traj, double t, double wheelbase) {
  FlatSample out;
  out.x = traj.x(t);
  out.y = traj.y(t);
  const double xd = traj.x(t, 1);
  const double yd = traj.y(t, 1);
  out.v = std::hypot(xd, yd);
  if (!(out.v >= traj.v_floor)) {
    throw FlatnessError("flat trajectory speed " + std::to_string(out.v) +
                        " below v_floor at t = " + std::to_string(t));
  }
  out.theta = std::atan2(yd, xd);
  out.kappa = (xd * traj.y(t, 2) - yd * traj.x(t, 2)) / (out.v * out.v * out.v);
  out.delta = std::atan(wheelbase * out.kappa);
  return out;
}

FlatTrajectory fit_quintic(const ReferencePath& path, const TrackMap& track,
                           const std::function<double(double)>& v_profile,
                           double t_plan, const QuinticFitOptions& opt) {
  if (!(t_plan > 0.0)) throw ContractError("fit_quintic: T_plan must be positive");
  if (path.empty()) throw ContractError("fit_quintic: empty reference path");
  if (opt.samples < 6) throw ContractError("fit_quintic: need at least 6 samples");

  // Time allocation along the offset path.
  std::vector<double> ts{0.0};
  std::vector<double> ss{path.s0};
  Eigen::Vector2d prev = path_point(path, track, path.s0);
  double v_prev = v_profile(path.s0);
  if (!(v_prev > opt.v_floor)) {
    throw ContractError("fit_quintic: speed profile at or below v_floor");
  }
  while (ts.back() < t_plan) {
    const double s = ss.back() + opt.ds_integrate;
    const double v = v_profile(s);
    if (!(v > opt.v_floor)) {
      throw ContractError("fit_quintic: speed profile at or below v_floor at s = " +
                          std::to_string(s));
    }
    const Eigen::Vector2d p = path_point(path, track, s);
    ts.push_back(ts.back() + 2.0 * (p - prev).norm() / (v + v_prev));
    ss.push_back(s);
    prev = p;
    v_prev = v;
  }
  auto s_at = [&](double t) {
    const auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return ss.front();
    const auto i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return ss[i - 1] + w * (ss[i] - ss[i - 1]);
  };
  auto velocity_at = [&](double s) {
    const double h = 0.5 * opt.ds_integrate;
    const Eigen::Vector2d dir =
        (path_point(path, track, s + h) - path_point(path, track, s - h)).normalized();
    return Eigen::Vector2d(v_profile(s) * dir);
  };

  const int ns = opt.samples;
  Eigen::MatrixXd basis(ns, 6);
  Eigen::MatrixXd target(ns, 2);
  for (int j = 0; j < ns; ++j) {
    const double tau = static_cast<double>(j) / (ns - 1);
    const Eigen::Vector2d p = path_point(path, track, s_at(tau * t_plan));
    target.row(j) = p.transpose();
    double pw = 1.0;
    for (int k = 0; k < 6; ++k, pw *= tau) basis(j, k) = pw;
  }
  const double s_end = s_at(t_plan);
  const Eigen::Vector2d p0 = target.row(0).transpose();
  const Eigen::Vector2d p1 = target.row(ns - 1).transpose();
  const Eigen::Vector2d v0 = velocity_at(path.s0) * t_plan;
  const Eigen::Vector2d v1 = velocity_at(s_end) * t_plan;

  // Equality-constrained least squares in normalized time tau = t / T.
  Eigen::MatrixXd c(4, 6);
  c.setZero();
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  for (int k = 0; k < 6; ++k) {
    c(2, k) = 1.0;
    c(3, k) = k;
  }
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(10, 10);
  kkt.topLeftCorner(6, 6) = basis.transpose() * basis;
  kkt.topRightCorner(6, 4) = c.transpose();
  kkt.bottomLeftCorner(4, 6) = c;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);

  FlatTrajectory traj;
  traj.duration = t_plan;
  traj.v_floor = opt.v_floor;
  for (int axis = 0; axis < 2; ++axis) {
    Eigen::VectorXd rhs(10);
    rhs.head(6) = basis.transpose() * target.col(axis);
    rhs.tail(4) << p0[axis], v0[axis], p1[axis], v1[axis];
    const Eigen::VectorXd sol = lu.solve(rhs);
    auto& out = axis == 0 ? traj.cx : traj.cy;
    double scale = 1.0;
    for (int k = 0; k < 6; ++k, scale /= t_plan) {
      out[static_cast<std::size_t>(k)] = sol[k] * scale;
    }
    // The clamped endpoints hold exactly, not just to solver round-off.
    out[0] = p0[axis];
  }
  return traj;
}

ReferenceStatesInputs recover_states(const FlatTrajectory& traj,
                                     const TrackMap& track, double wheelbase,
                                     double dt, int horizon,
                                     const ActuationLimits& limits,
                                     double s_hint) {
  if (horizon < 1 || !(dt > 0.0) || !(wheelbase > 0.0)) {
    throw ContractError("recover_states: bad horizon, step or wheelbase");
  }
  ReferenceStatesInputs out;
  out.wheelbase = wheelbase;
  out.dt = dt;
  double s_prev = s_hint;
  for (int k = 0; k <= horizon; ++k) {
    const double t = dt * k;
    const FlatSample fs = flat_sample(traj, t, wheelbase);
    FrenetState f = track.to_frenet(fs.x, fs.y, fs.theta, wrap_periodic(s_prev, track.length()));
    f.s = s_prev + periodic_delta(f.s, s_prev, track.length());
    s_prev = f.s;
    out.x_ref.push_back(f);
    if (k == horizon) break;
    double v = fs.v;
    double delta = fs.delta;
    if (v > limits.v_max) {
      v = limits.v_max;
      ++out.clip_events;
    }
    if (std::abs(delta) > limits.delta_max) {
      delta = std::clamp(delta, -limits.delta_max, limits.delta_max);
      ++out.clip_events;
    }
    out.v_ref.push_back(v);
    out.delta_ref.push_back(delta);
  }
  return out;
}

}  // namespace overtake
