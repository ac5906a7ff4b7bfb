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
#include <random>

#include "overtake/common.hpp"
#include "overtake/corridor.hpp"

namespace overtake {
namespace {

SgpModel constant_model(double value, TargetKind kind) {
  std::vector<Observation> obs;
  for (int i = 0; i < 40; ++i) obs.push_back({-100.0 + 10.0 * i, value, 0.05});
  SgpFitOptions opt;
  opt.hyper = SgpHyper::defaults(kind);
  opt.hyper.center_targets = true;
  return fit(obs, 20, kind, opt);
}

TEST(ForwardSimulate, FarFasterOpponentNeverInteracts) {
  EgoMotionModel ego;
  ego.v_ego = 2.0;
  ego.horizon = 3.0;
  const auto d = constant_model(0.2, TargetKind::kLateral);
  const auto v = constant_model(4.0, TargetKind::kVelocity);
  EXPECT_TRUE(forward_simulate(ego, 0.0, d, v, 100.0).empty());
}

TEST(ForwardSimulate, ConstantSpeedCatchUpTime) {
  EgoMotionModel ego;
  ego.v_ego = 2.0;
  ego.a_min = ego.a_max = 0.0;
  ego.horizon = 5.0;
  const auto d = constant_model(0.2, TargetKind::kLateral);
  const auto v = constant_model(1.0, TargetKind::kVelocity);
  const OccupancyProfile p = forward_simulate(ego, 0.0, d, v, 5.0);
  ASSERT_FALSE(p.empty());
  const double t_entry = (5.0 - ego.l_front) / (2.0 - 1.0);
  EXPECT_GE(p.samples.front().t, t_entry);
  EXPECT_LE(p.samples.front().t - t_entry, ego.dt + 1e-9);
  EXPECT_DOUBLE_EQ(p.c_start, p.samples.front().s_ego);
  EXPECT_DOUBLE_EQ(p.c_end, p.samples.back().s_ego);
}

TEST(ForwardSimulate, StationaryOpponentGivesConstantMean) {
  EgoMotionModel ego;
  ego.v_ego = 1.0;
  const auto d = constant_model(-0.35, TargetKind::kLateral);
  const auto v = constant_model(0.0, TargetKind::kVelocity);
  const OccupancyProfile p = forward_simulate(ego, 0.0, d, v, 3.0);
  ASSERT_FALSE(p.empty());
  for (std::size_t k = 0; k < p.samples.size(); ++k) {
    EXPECT_NEAR(p.samples[k].mean_d, -0.35, 1e-9);
    if (k > 0) EXPECT_GT(p.samples[k].s_ego, p.samples[k - 1].s_ego);
  }
}

OccupancyProfile make_profile(const std::vector<double>& mu, double var,
                              double ds = 0.1, double dt = 0.05) {
  OccupancyProfile p;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    p.samples.push_back({ds * k, mu[k], var, dt * k});
  }
  p.c_start = 0.0;
  p.c_end = ds * (mu.size() - 1);
  return p;
}

TEST(BuildCorridor, EffectiveWidth) {
  CorridorParams prm;
  const auto c = build_corridor(make_profile({0.0, 0.0, 0.0}, 0.0025), prm);
  EXPECT_FALSE(c.crossing);
  for (double w : c.width) EXPECT_NEAR(w, 0.60, 1e-12);
  const auto big = build_corridor(make_profile({0.0, 0.0}, 100.0), prm);
  for (double w : big.width) EXPECT_DOUBLE_EQ(w, prm.w_max);
}

TEST(BuildCorridor, CrossingBypass) {
  CorridorParams prm;
  std::vector<double> mu;
  for (int k = 0; k <= 40; ++k) mu.push_back(k / 40.0);  // 0 -> 1 m over 2 s
  const auto c = build_corridor(make_profile(mu, 0.01), prm);
  EXPECT_NEAR(c.mean_lateral_velocity, 0.5, 1e-12);
  EXPECT_TRUE(c.crossing);
  for (double w : c.width) {
    EXPECT_NEAR(w, prm.w_car + prm.crossing_margin * prm.w_margin, 1e-12);
  }
}

TEST(BuildCorridor, EmptyProfileRejected) {
  EXPECT_THROW(build_corridor(OccupancyProfile{}, CorridorParams{}),
               ContractError);
}

std::vector<double> brute_dilate(const std::vector<double>& s,
                                 const std::vector<double>& v, double w,
                                 bool take_max) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    double best = v[k];
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (std::abs(s[j] - s[k]) <= 0.5 * w + 1e-12) {
        best = take_max ? std::max(best, v[j]) : std::min(best, v[j]);
      }
    }
    out[k] = best;
  }
  return out;
}

TEST(Dilate, MatchesBruteForceOnIrregularGrid) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(0.01, 0.4), val(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s{0.0}, v{val(rng)};
    for (int k = 1; k < 60; ++k) {
      s.push_back(s.back() + step(rng));
      v.push_back(val(rng));
    }
    for (bool mx : {true, false}) {
      const auto got = dilate(s, v, 1.0, mx);
      const auto want = brute_dilate(s, v, 1.0, mx);
      for (std::size_t k = 0; k < v.size(); ++k) ASSERT_EQ(got[k], want[k]);
    }
  }
}

TEST(Dilate, SpikeCoversHalfWindow) {
  std::vector<double> s, v;
  for (int k = 0; k < 50; ++k) {
    s.push_back(0.1 * k);
    v.push_back(k == 25 ? 1.0 : 0.0);
  }
  const auto out = dilate(s, v, 1.0, true);
  for (int k = 0; k < 50; ++k) {
    if (std::abs(s[k] - s[25]) <= 0.5 - 1e-9) EXPECT_GE(out[k], 1.0);
  }
}

TEST(BuildCorridor, RandomProfileInvariants) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> mu(-1.0, 1.0), sd(0.0, 0.5);
  CorridorParams prm;
  for (int trial = 0; trial < 200; ++trial) {
    OccupancyProfile p;
    double s = 0.0;
    for (int k = 0; k < 30; ++k) {
      const double m = 0.1 * mu(rng);
      p.samples.push_back({s, m, sd(rng) * sd(rng), 0.05 * k});
      s += 0.12;
    }
    p.c_end = p.samples.back().s_ego;
    const auto c = build_corridor(p, prm);
    std::vector<double> ss;
    for (const auto& smp : p.samples) ss.push_back(smp.s_ego);
    const auto twice = dilate(ss, c.left_dilated, prm.dilation_window, true);
    const auto wide = dilate(ss, c.left, 2.0 * prm.dilation_window, true);
    for (std::size_t k = 0; k < ss.size(); ++k) {
      EXPECT_LE(c.width[k], prm.w_max);
      EXPECT_GE(c.left_dilated[k], c.left[k]);
      EXPECT_LE(c.right_dilated[k], c.right[k]);
      EXPECT_NEAR(c.left[k] + c.right[k], 2.0 * p.samples[k].mean_d, 1e-12);
      EXPECT_GE(twice[k], c.left_dilated[k]);
      EXPECT_EQ(twice[k], wide[k]);
    }
  }
}

}  // namespace
}  // namespace overtake
