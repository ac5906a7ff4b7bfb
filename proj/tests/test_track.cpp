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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "overtake/common.hpp"
#include "overtake/track.hpp"

namespace overtake {
namespace {

using testing::circle_track;
using testing::stadium_track;

TEST(Track, DensifiedUnitSquarePerimeter) {
  // Corner waypoints alone are below the minimum count; sample each side.
  std::vector<Waypoint> wp;
  const double corners[5][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 25; ++i) {
      const double f = i / 25.0;
      wp.push_back({corners[c][0] + f * (corners[c + 1][0] - corners[c][0]),
                    corners[c][1] + f * (corners[c + 1][1] - corners[c][1]),
                    0.5, 0.5, 0.0});
    }
  }
  const TrackMap t = TrackMap::from_waypoints(wp);
  EXPECT_NEAR(t.length(), 4.0, 0.02);
  for (double s = 0.0; s < t.length(); s += 0.1) {
    EXPECT_NEAR(t.left_bound(s), 0.5, 1e-9);
  }
}

TEST(Track, CircleCurvature) {
  const double r = 5.0;
  const TrackMap t = circle_track(r, 100);
  EXPECT_NEAR(t.length(), 2.0 * std::numbers::pi * r, 1e-3);
  for (double s = 0.0; s < t.length(); s += 0.05) {
    EXPECT_NEAR(t.curvature(s), 1.0 / r, 0.02 / r) << "s = " << s;
  }
}

TEST(Track, QueriesArePeriodic) {
  const TrackMap t = stadium_track();
  const double len = t.length();
  for (double s = 0.0; s < len; s += 0.37) {
    EXPECT_NEAR(t.curvature(s), t.curvature(s + len), 1e-12);
    EXPECT_NEAR(t.left_bound(s), t.left_bound(s + len), 1e-12);
    EXPECT_NEAR(t.position(s).x(), t.position(s - len).x(), 1e-12);
  }
}

TEST(Track, FrenetOfCenterlinePoint) {
  const TrackMap t = stadium_track();
  const double s = 5.0;  // on the bottom straight
  const auto p = t.position(s);
  const FrenetState f = t.to_frenet(p.x(), p.y(), t.heading(s));
  EXPECT_NEAR(f.s, s, 1e-6);
  EXPECT_NEAR(f.d, 0.0, 1e-9);
  EXPECT_NEAR(f.dtheta, 0.0, 1e-9);
  const auto q = p + 0.3 * t.normal(s);
  EXPECT_NEAR(t.to_frenet(q.x(), q.y(), t.heading(s)).d, 0.3, 1e-9);
}

TEST(Track, RoundTripRandomStates) {
  const TrackMap t = stadium_track();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> us(0.0, t.length());
  std::uniform_real_distribution<double> ud(-1.4, 1.4);
  std::uniform_real_distribution<double> ua(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const FrenetState f{us(rng), ud(rng), ua(rng)};
    const Pose2 p = t.to_cartesian(f);
    const FrenetState g = t.to_frenet(p.x, p.y, p.theta);
    worst = std::max(worst, std::abs(periodic_delta(g.s, f.s, t.length())));
    worst = std::max(worst, std::abs(g.d - f.d));
    worst = std::max(worst, std::abs(wrap_angle(g.dtheta - f.dtheta)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Track, FoldOverRejected) {
  const TrackMap t = circle_track(1.0, 60, 0.4);
  EXPECT_THROW(t.to_cartesian({0.5, 2.0, 0.0}), GeometryError);
  EXPECT_THROW(t.to_cartesian({0.5, -2.0, 0.0}), GeometryError);
}

TEST(Track, OffTrackRejected) {
  const TrackMap t = stadium_track();
  const auto p = t.position(5.0) + 4.0 * t.normal(5.0);
  EXPECT_THROW(t.to_frenet(p.x(), p.y(), 0.0), OffTrackError);
}

std::string circle_csv(int n, double r) {
  std::ostringstream os;
  os << "x,y,w_left,w_right,d_rl\n";
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    os << r * std::cos(a) << "," << r * std::sin(a) << ",0.5,0.5,0\n";
  }
  return os.str();
}

TEST(TrackParse, ValidFile) {
  std::istringstream in(circle_csv(60, 4.0));
  EXPECT_NEAR(parse_track(in).length(), 2.0 * std::numbers::pi * 4.0, 1e-2);
}

TEST(TrackParse, DuplicateWaypointReportsLine) {
  std::string csv = circle_csv(20, 4.0);
  // Repeat the fifth data row right after itself (file line 7).
  std::istringstream src(csv);
  std::string line, out;
  int n = 0;
  while (std::getline(src, line)) {
    out += line + "\n";
    if (++n == 6) out += line + "\n";
  }
  std::istringstream in(out);
  try {
    parse_track(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7);
  }
}

TEST(TrackParse, MalformedRowReportsLine) {
  std::string csv = circle_csv(20, 4.0);
  csv += "1.0,abc,0.5,0.5,0\n";
  std::istringstream in(csv);
  try {
    parse_track(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 22);
  }
}

TEST(TrackParse, OpenLoopRejected) {
  std::ostringstream os;
  os << "x,y,w_left,w_right,d_rl\n";
  for (int i = 0; i < 20; ++i) os << i * 0.5 << ",0,0.5,0.5,0\n";
  std::istringstream in(os.str());
  EXPECT_THROW(parse_track(in), GeometryError);
}

TEST(SpeedProfile, CurvatureLimitOnCircle) {
  const TrackMap t = circle_track(4.0, 80);
  const SpeedLimits lim{10.0, 4.0, 3.0};
  const auto v = SpeedProfile::raceline(t, lim);
  EXPECT_NEAR(v(1.0), std::sqrt(4.0 * 4.0), 0.05);
}

}  // namespace
}  // namespace overtake
