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

#include "overtake/track.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "overtake/common.hpp"

namespace overtake {
namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double speed_at(const PeriodicSpline& x, const PeriodicSpline& y, double u) {
  return std::hypot(x.derivative(u), y.derivative(u));
}

double arc_length(const PeriodicSpline& x, const PeriodicSpline& y, double a,
                  double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    acc += kGlWeights[i] * speed_at(x, y, mid + half * kGlNodes[i]);
  }
  return acc * half;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

TrackMap TrackMap::from_waypoints(std::span<const Waypoint> waypoints,
                                  const TrackOptions& options) {
  std::vector<Waypoint> wp(waypoints.begin(), waypoints.end());
  if (wp.size() >= 2 && std::hypot(wp.back().x - wp.front().x,
                                   wp.back().y - wp.front().y) < 1e-9) {
    wp.pop_back();  // explicit closing duplicate
  }
  if (wp.size() < 10) {
    throw GeometryError("track needs at least 10 distinct waypoints, got " +
                        std::to_string(wp.size()));
  }
  const double closure =
      std::hypot(wp.back().x - wp.front().x, wp.back().y - wp.front().y);
  if (closure > options.closure_tolerance) {
    throw GeometryError("track loop is open: endpoint gap " +
                        std::to_string(closure) + " m");
  }

  const std::size_t n = wp.size();
  std::vector<double> u(n), xs(n), ys(n), rl(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double chord =
          std::hypot(wp[i].x - wp[i - 1].x, wp[i].y - wp[i - 1].y);
      if (chord < 1e-9) {
        throw GeometryError("duplicate waypoint at index " + std::to_string(i));
      }
      acc += chord;
    }
    if (!(wp[i].w_left > 0.0) || !(wp[i].w_right > 0.0)) {
      throw GeometryError("non-positive track width at index " +
                          std::to_string(i));
    }
    u[i] = acc;
    xs[i] = wp[i].x;
    ys[i] = wp[i].y;
    rl[i] = wp[i].d_raceline;
  }
  const double period = acc + closure;
  const PeriodicSpline px(u, xs, period), py(u, ys, period), prl(u, rl, period);

  // Cumulative arc length at each waypoint parameter.
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ub = i + 1 < n ? u[i + 1] : period;
    cum[i + 1] = cum[i] + arc_length(px, py, u[i], ub);
  }
  const double length = cum[n];

  const auto samples = static_cast<std::size_t>(
      std::max(3.0, std::round(length / options.resample_step)));
  const double step = length / static_cast<double>(samples);

  TrackMap t;
  t.length_ = length;
  t.step_ = step;
  t.band_margin_ = options.band_margin;
  t.grid_s_.resize(samples);
  t.grid_xy_.resize(samples);
  std::vector<double> gx(samples), gy(samples), gl(samples), gr(samples),
      grl(samples);
  std::size_t seg = 0;
  for (std::size_t j = 0; j < samples; ++j) {
    const double s = step * static_cast<double>(j);
    while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
    const double ua = u[seg];
    const double ub = seg + 1 < n ? u[seg + 1] : period;
    // Newton on the arc-length integral within the segment.
    double uu = ua + (s - cum[seg]) / (cum[seg + 1] - cum[seg]) * (ub - ua);
    for (int it = 0; it < 8; ++it) {
      const double f = cum[seg] + arc_length(px, py, ua, uu) - s;
      uu -= f / speed_at(px, py, uu);
      uu = std::clamp(uu, ua, ub);
      if (std::abs(f) < 1e-13) break;
    }
    const double frac = (uu - ua) / (ub - ua);
    const Waypoint& a = wp[seg];
    const Waypoint& b = wp[(seg + 1) % n];
    t.grid_s_[j] = s;
    gx[j] = px(uu);
    gy[j] = py(uu);
    t.grid_xy_[j] = {gx[j], gy[j]};
    gl[j] = a.w_left + frac * (b.w_left - a.w_left);
    gr[j] = -(a.w_right + frac * (b.w_right - a.w_right));
    grl[j] = prl(uu);
    if (!(gr[j] <= grl[j] && grl[j] <= gl[j])) {
      throw GeometryError("raceline outside track bounds near s = " +
                          std::to_string(s));
    }
  }

  // Central finite-difference curvature on the uniform grid.
  std::vector<double> kappa(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const std::size_t jm = (j + samples - 1) % samples;
    const std::size_t jp = (j + 1) % samples;
    const double dx = (gx[jp] - gx[jm]) / (2.0 * step);
    const double dy = (gy[jp] - gy[jm]) / (2.0 * step);
    const double ddx = (gx[jp] - 2.0 * gx[j] + gx[jm]) / (step * step);
    const double ddy = (gy[jp] - 2.0 * gy[j] + gy[jm]) / (step * step);
    kappa[j] = (dx * ddy - dy * ddx) / std::pow(dx * dx + dy * dy, 1.5);
  }

  t.x_ = PeriodicSpline(t.grid_s_, gx, length);
  t.y_ = PeriodicSpline(t.grid_s_, gy, length);
  t.kappa_ = PeriodicSpline(t.grid_s_, kappa, length);
  t.left_ = PeriodicSpline(t.grid_s_, gl, length);
  t.right_ = PeriodicSpline(t.grid_s_, gr, length);
  t.raceline_ = PeriodicSpline(t.grid_s_, grl, length);
  return t;
}

Eigen::Vector2d TrackMap::position(double s) const { return {x_(s), y_(s)}; }

Eigen::Vector2d TrackMap::tangent(double s) const {
  return Eigen::Vector2d(x_.derivative(s), y_.derivative(s)).normalized();
}

Eigen::Vector2d TrackMap::normal(double s) const {
  const Eigen::Vector2d t = tangent(s);
  return {-t.y(), t.x()};
}

double TrackMap::heading(double s) const {
  return std::atan2(y_.derivative(s), x_.derivative(s));
}

Eigen::Vector2d TrackMap::raceline_position(double s) const {
  return position(s) + raceline_offset(s) * normal(s);
}

double TrackMap::refine_projection(const Eigen::Vector2d& q, double s0) const {
  double s = s0;
  for (int it = 0; it < 30; ++it) {
    const Eigen::Vector2d p = position(s);
    const Eigen::Vector2d d1(x_.derivative(s), y_.derivative(s));
    const Eigen::Vector2d d2(x_.second_derivative(s), y_.second_derivative(s));
    const Eigen::Vector2d r = q - p;
    const double g = r.dot(d1);
    double gp = -d1.squaredNorm() + r.dot(d2);
    if (gp >= 0.0) gp = -d1.squaredNorm();
    const double ds = std::clamp(-g / gp, -2.0 * step_, 2.0 * step_);
    s += ds;
    if (std::abs(ds) < 1e-14 * std::max(1.0, length_)) break;
  }
  return wrap_periodic(s, length_);
}

FrenetState TrackMap::to_frenet(double x, double y, double theta,
                                std::optional<double> hint) const {
  const Eigen::Vector2d q(x, y);
  const std::size_t n = grid_xy_.size();
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  auto scan = [&](std::size_t first, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = (first + k) % n;
      const double d2 = (grid_xy_[i] - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
  };
  const double max_reach = 4.0 + band_margin_;
  if (hint) {
    const auto half = static_cast<std::size_t>(std::ceil(3.0 / step_));
    const auto center =
        static_cast<std::size_t>(wrap_periodic(*hint, length_) / step_) % n;
    scan((center + n - std::min(half, n / 2)) % n, std::min(2 * half + 1, n));
  }
  if (!hint || std::sqrt(best_d2) > max_reach) scan(0, n);

  FrenetState f;
  f.s = refine_projection(q, grid_s_[best]);
  f.d = (q - position(f.s)).dot(normal(f.s));
  f.dtheta = wrap_angle(theta - heading(f.s));
  if (f.d > left_bound(f.s) + band_margin_ ||
      f.d < right_bound(f.s) - band_margin_) {
    throw OffTrackError("point (" + std::to_string(x) + ", " +
                        std::to_string(y) + ") is off track: d = " +
                        std::to_string(f.d));
  }
  return f;
}

Pose2 TrackMap::to_cartesian(const FrenetState& f) const {
  const double kappa = curvature(f.s);
  if (std::abs(f.d * kappa) >= 1.0) {
    throw GeometryError("Frenet fold-over: |d * kappa| >= 1 at s = " +
                        std::to_string(f.s));
  }
  const Eigen::Vector2d p = position(f.s) + f.d * normal(f.s);
  return {p.x(), p.y(), wrap_angle(heading(f.s) + f.dtheta)};
}

TrackMap parse_track(std::istream& in, const TrackOptions& options) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<Waypoint> wp;
  std::vector<int> lines;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char c : t) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != "x,y,w_left,w_right,d_rl") {
        throw ParseError("expected header 'x,y,w_left,w_right,d_rl'", line_no);
      }
      header_seen = true;
      continue;
    }
    std::array<double, 5> v{};
    std::stringstream ss(t);
    std::string field;
    std::size_t k = 0;
    while (std::getline(ss, field, ',')) {
      if (k >= v.size()) throw ParseError("too many fields", line_no);
      const std::string f = trim(field);
      std::size_t used = 0;
      try {
        v[k] = std::stod(f, &used);
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + f + "'", line_no);
      }
      if (used != f.size() || !std::isfinite(v[k])) {
        throw ParseError("not a finite number: '" + f + "'", line_no);
      }
      ++k;
    }
    if (k != v.size()) throw ParseError("expected 5 fields", line_no);
    if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
      throw ParseError("track widths must be positive", line_no);
    }
    const Waypoint w{v[0], v[1], v[2], v[3], v[4]};
    if (!wp.empty() &&
        std::hypot(w.x - wp.back().x, w.y - wp.back().y) < 1e-9) {
      throw ParseError("duplicate waypoint", line_no);
    }
    // A repeat of an earlier (non-first) waypoint breaks monotone arc length.
    for (std::size_t i = 1; i + 1 < wp.size(); ++i) {
      if (std::hypot(w.x - wp[i].x, w.y - wp[i].y) < 1e-9) {
        throw ParseError("waypoint repeats line " + std::to_string(lines[i]),
                         line_no);
      }
    }
    wp.push_back(w);
    lines.push_back(line_no);
  }
  if (!header_seen) throw ParseError("empty track file", line_no);
  return TrackMap::from_waypoints(wp, options);
}

TrackMap load_track(const std::filesystem::path& path,
                    const TrackOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open track file " + path.string());
  return parse_track(in, options);
}

FrenetState to_frenet(const TrackMap& track, double x, double y, double theta) {
  return track.to_frenet(x, y, theta);
}

Pose2 to_cartesian(const TrackMap& track, const FrenetState& f) {
  return track.to_cartesian(f);
}

SpeedProfile SpeedProfile::raceline(const TrackMap& track,
                                    const SpeedLimits& lim) {
  SpeedProfile p;
  const auto grid = track.grid();
  const std::size_t n = grid.size();
  p.length_ = track.length();
  p.step_ = track.resample_step();
  std::vector<Eigen::Vector2d> pts(n);
  for (std::size_t j = 0; j < n; ++j) pts[j] = track.raceline_position(grid[j]);
  std::vector<double> ds(n);
  p.v_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Vector2d& a = pts[(j + n - 1) % n];
    const Eigen::Vector2d& b = pts[j];
    const Eigen::Vector2d& c = pts[(j + 1) % n];
    ds[j] = (c - b).norm();
    const Eigen::Vector2d ab = b - a, ac = c - a, bc = c - b;
    const double cross = ab.x() * ac.y() - ab.y() * ac.x();
    const double denom = ab.norm() * bc.norm() * ac.norm();
    const double kappa = denom > 0.0 ? 2.0 * std::abs(cross) / denom : 0.0;
    p.v_[j] = kappa > 1e-9 ? std::min(lim.v_cap, std::sqrt(lim.a_lat / kappa))
                           : lim.v_cap;
  }
  // Two sweeps each way settle the periodic boundary.
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = (k + 1) % n;
      p.v_[j] = std::min(p.v_[j],
                         std::sqrt(p.v_[k] * p.v_[k] + 2.0 * lim.a_long * ds[k]));
    }
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t j = (k + 1) % n;
      p.v_[k] = std::min(p.v_[k],
                         std::sqrt(p.v_[j] * p.v_[j] + 2.0 * lim.a_long * ds[k]));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    p.lap_time_ += 2.0 * ds[j] / (p.v_[j] + p.v_[(j + 1) % n]);
  }
  return p;
}

SpeedProfile SpeedProfile::constant(const TrackMap& track, double v) {
  SpeedProfile p;
  p.length_ = track.length();
  p.step_ = track.resample_step();
  p.v_.assign(track.grid().size(), v);
  p.lap_time_ = track.length() / v;
  return p;
}

double SpeedProfile::operator()(double s) const {
  if (v_.empty()) throw ContractError("SpeedProfile: empty profile");
  const double u = wrap_periodic(s, length_) / step_;
  const std::size_t n = v_.size();
  const auto i = static_cast<std::size_t>(u) % n;
  const double f = u - std::floor(u);
  return v_[i] + f * (v_[(i + 1) % n] - v_[i]);
}

}  // namespace overtake
