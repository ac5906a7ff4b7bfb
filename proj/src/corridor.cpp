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

#include "overtake/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "overtake/common.hpp"

namespace overtake {
namespace {

double interpolate(const std::vector<ProfileSample>& samples,
                   const std::vector<double>& values, double s) {
  auto it = std::lower_bound(
      samples.begin(), samples.end(), s,
      [](const ProfileSample& p, double v) { return p.s_ego < v; });
  if (it == samples.begin()) return values.front();
  if (it == samples.end()) return values.back();
  const auto i = static_cast<std::size_t>(std::distance(samples.begin(), it));
  const double s0 = samples[i - 1].s_ego;
  const double s1 = samples[i].s_ego;
  const double f = (s - s0) / (s1 - s0);
  return values[i - 1] + f * (values[i] - values[i - 1]);
}

void fill_bounds(OccupancyCorridor& c, double base, double k_sigma,
                 const CorridorParams& p) {
  const auto& samples = c.profile.samples;
  const std::size_t n = samples.size();
  c.width.resize(n);
  c.left.resize(n);
  c.right.resize(n);
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w =
        std::min(base + k_sigma * std::sqrt(std::max(samples[k].var_d, 0.0)),
                 p.w_max);
    c.width[k] = w;
    c.left[k] = samples[k].mean_d + 0.5 * w;
    c.right[k] = samples[k].mean_d - 0.5 * w;
    s[k] = samples[k].s_ego;
  }
  c.left_dilated = dilate(s, c.left, p.dilation_window, true);
  c.right_dilated = dilate(s, c.right, p.dilation_window, false);
}

}  // namespace

double EgoMotionModel::acceleration(double v) const {
  const double ratio = v_max > 0.0 ? std::clamp(v / v_max, 0.0, 1.0) : 1.0;
  return a_max - (a_max - a_min) * ratio;
}

OccupancyProfile forward_simulate(const EgoMotionModel& ego, double s_ego0,
                                  const SgpModel& lateral,
                                  const SgpModel& velocity, double s_opp0,
                                  int opponent_id) {
  if (!(ego.dt > 0.0) || ego.horizon < ego.dt) {
    throw ContractError("forward_simulate: invalid time grid");
  }
  OccupancyProfile prof;
  prof.opponent_id = opponent_id;
  const auto steps = static_cast<int>(std::llround(ego.horizon / ego.dt));
  double s_ego = s_ego0;
  double v_ego = ego.v_ego;
  double s_opp = s_opp0;
  for (int j = 0; j <= steps; ++j) {
    const double t = j * ego.dt;
    const double gap = s_opp - s_ego;
    if (gap > -ego.l_rear && gap < ego.l_front) {
      const GpPrediction pd = lateral.predict(s_opp);
      if (!std::isfinite(pd.mean) || !std::isfinite(pd.variance)) {
        ++prof.dropped;
      } else if (prof.samples.empty() || s_ego > prof.samples.back().s_ego) {
        prof.samples.push_back({s_ego, pd.mean, pd.variance, t});
      }
    }
    if (j == steps) break;
    const double a = ego.acceleration(v_ego);
    s_ego += v_ego * ego.dt + 0.5 * a * ego.dt * ego.dt;
    v_ego = std::max(0.0, v_ego + a * ego.dt);
    double v_opp = velocity.predict(s_opp).mean;
    if (!std::isfinite(v_opp)) {
      ++prof.dropped;
      v_opp = 0.0;
    }
    s_opp += std::max(v_opp, 0.0) * ego.dt;
  }
  if (!prof.samples.empty()) {
    prof.c_start = prof.samples.front().s_ego;
    prof.c_end = prof.samples.back().s_ego;
  }
  return prof;
}

std::vector<double> dilate(std::span<const double> s,
                           std::span<const double> values, double window,
                           bool take_max) {
  const std::size_t n = values.size();
  std::vector<double> out(n);
  const double half = 0.5 * window;
  constexpr double kEps = 1e-12;
  auto better = [take_max](double a, double b) {
    return take_max ? a >= b : a <= b;
  };
  std::deque<std::size_t> dq;  // indices with monotone values
  std::size_t right = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (right < n && s[right] <= s[k] + half + kEps) {
      while (!dq.empty() && better(values[right], values[dq.back()])) {
        dq.pop_back();
      }
      dq.push_back(right++);
    }
    while (s[dq.front()] < s[k] - half - kEps) dq.pop_front();
    out[k] = values[dq.front()];
  }
  return out;
}

bool OccupancyCorridor::active_at(double s) const {
  return !profile.empty() && s >= profile.c_start && s <= profile.c_end;
}

double OccupancyCorridor::left_at(double s) const {
  return interpolate(profile.samples, left_dilated, s);
}

double OccupancyCorridor::right_at(double s) const {
  return interpolate(profile.samples, right_dilated, s);
}

OccupancyCorridor build_corridor(const OccupancyProfile& profile,
                                 const CorridorParams& params) {
  if (profile.empty()) throw ContractError("build_corridor: empty profile");
  OccupancyCorridor c;
  c.profile = profile;
  const auto& first = profile.samples.front();
  const auto& last = profile.samples.back();
  const double span_t = last.t - first.t;
  c.mean_lateral_velocity =
      span_t > 0.0 ? (last.mean_d - first.mean_d) / span_t : 0.0;
  c.crossing = std::abs(c.mean_lateral_velocity) > params.crossing_speed;
  if (c.crossing) {
    fill_bounds(c, params.w_car + params.crossing_margin * params.w_margin, 0.0,
                params);
  } else {
    fill_bounds(c, params.w_car + params.w_margin, params.k_sigma, params);
  }
  return c;
}

}  // namespace overtake
