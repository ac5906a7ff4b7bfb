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

#ifndef OVERTAKE_TRACK_HPP_
#define OVERTAKE_TRACK_HPP_

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "overtake/spline.hpp"

namespace overtake {

/// Track-relative coordinates: arc length, signed lateral offset (left
/// positive) and heading error with respect to the centerline tangent.
struct FrenetState {
  double s = 0.0;
  double d = 0.0;
  double dtheta = 0.0;
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// One record of a track file.
struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double w_left = 0.0;
  double w_right = 0.0;
  double d_raceline = 0.0;
};

struct TrackOptions {
  double resample_step = 0.05;      // m
  double closure_tolerance = 0.5;   // max gap between last and first waypoint
  double band_margin = 0.3;         // off-track band beyond the boundaries
};

/// Closed track, resampled to uniform arc length and interpolated with
/// periodic C2 splines. Immutable after construction.
class TrackMap {
 public:
  static TrackMap from_waypoints(std::span<const Waypoint> waypoints,
                                 const TrackOptions& options = {});

  double length() const { return length_; }
  double resample_step() const { return step_; }
  double band_margin() const { return band_margin_; }

  Eigen::Vector2d position(double s) const;
  /// Unit tangent of the centerline.
  Eigen::Vector2d tangent(double s) const;
  /// Unit left normal of the centerline.
  Eigen::Vector2d normal(double s) const;
  double heading(double s) const;
  double curvature(double s) const { return kappa_(s); }
  double curvature_rate(double s) const { return kappa_.derivative(s); }

  /// Signed lateral position of the left boundary (positive).
  double left_bound(double s) const { return left_(s); }
  /// Signed lateral position of the right boundary (negative).
  double right_bound(double s) const { return right_(s); }
  double raceline_offset(double s) const { return raceline_(s); }
  Eigen::Vector2d raceline_position(double s) const;

  /// Resampled arc-length grid (uniform, starting at 0).
  std::span<const double> grid() const { return grid_s_; }

  /// Nearest-point projection. `hint` restricts the coarse scan to a window
  /// around a previous estimate; the global scan is used as a fallback.
  FrenetState to_frenet(double x, double y, double theta,
                        std::optional<double> hint = std::nullopt) const;
  Pose2 to_cartesian(const FrenetState& f) const;

 private:
  double refine_projection(const Eigen::Vector2d& q, double s0) const;

  double length_ = 0.0;
  double step_ = 0.0;
  double band_margin_ = 0.0;
  std::vector<double> grid_s_;
  std::vector<Eigen::Vector2d> grid_xy_;
  PeriodicSpline x_, y_, kappa_, left_, right_, raceline_;
};

/// Reads a comma-separated track file with header `x,y,w_left,w_right,d_rl`.
/// Throws ParseError (with line number) or GeometryError.
TrackMap load_track(const std::filesystem::path& path,
                    const TrackOptions& options = {});
TrackMap parse_track(std::istream& in, const TrackOptions& options = {});

FrenetState to_frenet(const TrackMap& track, double x, double y, double theta);
Pose2 to_cartesian(const TrackMap& track, const FrenetState& f);

struct SpeedLimits {
  double v_cap = 5.5;    // m/s
  double a_lat = 4.0;    // m/s^2
  double a_long = 3.0;   // m/s^2
};

/// Raceline speed profile: curvature-limited, then forward/backward
/// acceleration passes around the closed loop.
class SpeedProfile {
 public:
  SpeedProfile() = default;
  static SpeedProfile raceline(const TrackMap& track, const SpeedLimits& lim);
  static SpeedProfile constant(const TrackMap& track, double v);

  double operator()(double s) const;
  double lap_time() const { return lap_time_; }

 private:
  double length_ = 0.0;
  double step_ = 0.0;
  std::vector<double> v_;
  double lap_time_ = 0.0;
};

}  // namespace overtake

#endif  // OVERTAKE_TRACK_HPP_
