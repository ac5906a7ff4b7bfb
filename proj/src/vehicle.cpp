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

#include "overtake/vehicle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "overtake/common.hpp"

namespace overtake {
namespace {

struct Rate {
  double x, y, theta, v;
};

}  // namespace

VehicleState step_vehicle(const VehicleState& s, const Command& cmd, double dt,
                          const VehicleParams& p) {
  if (!(dt > 0.0)) throw ContractError("step_vehicle: dt must be positive");
  VehicleState out = s;
  out.v_cmd = std::max(cmd.v, 0.0);
  out.delta_cmd = std::clamp(cmd.delta, -p.delta_max, p.delta_max);
  const double tan_d = std::tan(out.delta_cmd);
  const bool lag = p.tau_v > 0.0;
  if (!lag) out.v = out.v_cmd;

  auto rate = [&](double theta, double v) {
    return Rate{v * std::cos(theta), v * std::sin(theta), v * tan_d / p.wheelbase,
                lag ? (out.v_cmd - v) / p.tau_v : 0.0};
  };
  const Rate k1 = rate(out.theta, out.v);
  const Rate k2 = rate(out.theta + 0.5 * dt * k1.theta, out.v + 0.5 * dt * k1.v);
  const Rate k3 = rate(out.theta + 0.5 * dt * k2.theta, out.v + 0.5 * dt * k2.v);
  const Rate k4 = rate(out.theta + dt * k3.theta, out.v + dt * k3.v);
  out.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.y += dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  out.theta = wrap_angle(out.theta + dt / 6.0 * (k1.theta + 2.0 * k2.theta +
                                                 2.0 * k3.theta + k4.theta));
  out.v = std::max(0.0, out.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v));
  return out;
}

OrientedBox footprint(const VehicleState& s, const VehicleParams& p) {
  return {s.x, s.y, s.theta, 0.5 * p.length, 0.5 * p.width};
}

bool intersects(const OrientedBox& a, const OrientedBox& b) {
  const double dx = b.cx - a.cx;
  const double dy = b.cy - a.cy;
  const std::array<double, 2> ca{std::cos(a.theta), std::sin(a.theta)};
  const std::array<double, 2> cb{std::cos(b.theta), std::sin(b.theta)};
  // Axes: the two box frames, each with a length and a width direction.
  const std::array<std::array<double, 2>, 4> axes{{{ca[0], ca[1]},
                                                   {-ca[1], ca[0]},
                                                   {cb[0], cb[1]},
                                                   {-cb[1], cb[0]}}};
  auto radius = [](const OrientedBox& box, const std::array<double, 2>& c,
                   const std::array<double, 2>& axis) {
    const double along = std::abs(c[0] * axis[0] + c[1] * axis[1]);
    const double across = std::abs(-c[1] * axis[0] + c[0] * axis[1]);
    return box.half_length * along + box.half_width * across;
  };
  for (const auto& axis : axes) {
    const double dist = std::abs(dx * axis[0] + dy * axis[1]);
    if (dist > radius(a, ca, axis) + radius(b, cb, axis)) return false;
  }
  return true;
}

double pure_pursuit(const VehicleState& s, double tx, double ty, double wheelbase) {
  const double dx = tx - s.x;
  const double dy = ty - s.y;
  const double ld = std::hypot(dx, dy);
  if (!(ld > 1e-9)) return 0.0;
  const double alpha = std::atan2(dy, dx) - s.theta;
  return std::atan(2.0 * wheelbase * std::sin(alpha) / ld);
}

}  // namespace overtake
