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

#ifndef OVERTAKE_TESTS_FIXTURES_HPP_
#define OVERTAKE_TESTS_FIXTURES_HPP_

#include <cmath>
#include <numbers>
#include <vector>

#include "overtake/track.hpp"

namespace overtake::testing {

inline TrackMap circle_track(double radius, int n, double half_width = 0.5) {
  std::vector<Waypoint> wp;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    wp.push_back({radius * std::cos(a), radius * std::sin(a), half_width,
                  half_width, 0.0});
  }
  return TrackMap::from_waypoints(wp);
}

/// Stadium: two straights of length `straight` joined by half circles.
inline TrackMap stadium_track(double straight = 20.0, double radius = 6.0,
                              double half_width = 1.5, double step = 0.25) {
  std::vector<Waypoint> wp;
  auto add = [&](double x, double y) {
    wp.push_back({x, y, half_width, half_width, 0.0});
  };
  const int ns = static_cast<int>(straight / step);
  const int nc = static_cast<int>(std::numbers::pi * radius / step);
  for (int i = 0; i < ns; ++i) add(-0.5 * straight + i * step, -radius);
  for (int i = 0; i < nc; ++i) {
    const double a = -0.5 * std::numbers::pi + std::numbers::pi * i / nc;
    add(0.5 * straight + radius * std::cos(a), radius * std::sin(a));
  }
  for (int i = 0; i < ns; ++i) add(0.5 * straight - i * step, radius);
  for (int i = 0; i < nc; ++i) {
    const double a = 0.5 * std::numbers::pi + std::numbers::pi * i / nc;
    add(-0.5 * straight + radius * std::cos(a), radius * std::sin(a));
  }
  return TrackMap::from_waypoints(wp);
}

}  // namespace overtake::testing

#endif  // OVERTAKE_TESTS_FIXTURES_HPP_
