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

#include "overtake/gap_planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include <nlohmann/json.hpp>

#include "overtake/common.hpp"

namespace overtake {
namespace {

constexpr double kTieTolerance = 1e-12;

GapCandidate& slot(std::vector<GapCandidate>& gaps, const GapId& id) {
  for (GapCandidate& g : gaps) {
    if (g.id == id) return g;
  }
  gaps.push_back({});
  gaps.back().id = id;
  return gaps.back();
}

void add_sample(std::vector<GapCandidate>& gaps, const GapId& id, double s,
                double lo, double hi) {
  GapCandidate& g = slot(gaps, id);
  g.s.push_back(s);
  g.lower.push_back(lo);
  g.upper.push_back(hi);
}

struct Interval {
  double lo;
  double hi;
  int id;
};

// Cubic Bezier with control points b0..b3 at parameter u.
double bezier(double b0, double b1, double b2, double b3, double u) {
  const double v = 1.0 - u;
  return v * v * v * b0 + 3.0 * v * v * u * b1 + 3.0 * v * u * u * b2 +
         u * u * u * b3;
}

void clip_to_track(ReferencePath& ref, const TrackMap& track, double w_car) {
  for (std::size_t i = 0; i < ref.d.size(); ++i) {
    const double s = ref.s0 + ref.ds * static_cast<double>(i);
    const double lo = track.right_bound(s) + 0.5 * w_car;
    const double hi = track.left_bound(s) - 0.5 * w_car;
    const double c = std::clamp(ref.d[i], lo, hi);
    if (c != ref.d[i]) {
      ref.d[i] = c;
      ++ref.clipped;
    }
  }
}

std::size_t sample_count(double length, double step) {
  return static_cast<std::size_t>(std::ceil(length / step - 1e-9)) + 1;
}

}  // namespace

std::string GapId::str() const {
  switch (kind) {
    case GapKind::kLeft:
      return "L";
    case GapKind::kRight:
      return "R";
    case GapKind::kMiddle:
      return "M(" + std::to_string(lower_id) + "," + std::to_string(upper_id) +
             ")";
    case GapKind::kFullTrack:
      break;
  }
  return "F";
}

double GapCandidate::mean_center() const {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += center(k);
  return acc / static_cast<double>(s.size());
}

std::vector<GapCandidate> measure_gaps(
    const std::vector<OccupancyCorridor>& corridors, const TrackMap& track,
    const GapParams& p) {
  if (p.samples < 2) throw ContractError("measure_gaps: need N_s >= 2");
  double s_min = std::numeric_limits<double>::infinity();
  double s_max = -std::numeric_limits<double>::infinity();
  for (const auto& c : corridors) {
    if (c.profile.empty()) continue;
    s_min = std::min(s_min, c.c_start());
    s_max = std::max(s_max, c.c_end());
  }
  std::vector<GapCandidate> gaps;
  if (!std::isfinite(s_min)) {
    GapCandidate full;
    full.id = {GapKind::kFullTrack};
    full.min_width = std::numeric_limits<double>::infinity();
    gaps.push_back(full);
    return gaps;
  }

  std::vector<Interval> active;
  for (int k = 0; k < p.samples; ++k) {
    const double s = s_min + (s_max - s_min) * k / (p.samples - 1);
    const double tl = track.left_bound(s);
    const double tr = track.right_bound(s);
    active.clear();
    for (const auto& c : corridors) {
      if (c.active_at(s)) {
        active.push_back({c.right_at(s), c.left_at(s), c.profile.opponent_id});
      }
    }
    if (active.empty()) {
      add_sample(gaps, {GapKind::kRight}, s, tr + p.eps_side, tl - p.eps_side);
      add_sample(gaps, {GapKind::kLeft}, s, tr + p.eps_side, tl - p.eps_side);
      continue;
    }
    std::sort(active.begin(), active.end(),
              [](const Interval& a, const Interval& b) {
                return std::tie(a.lo, a.id) < std::tie(b.lo, b.id);
              });
    double reach = active.front().hi;  // highest left edge seen so far
    add_sample(gaps, {GapKind::kRight}, s, tr + p.eps_side, active.front().lo);
    for (std::size_t j = 0; j + 1 < active.size(); ++j) {
      reach = std::max(reach, active[j].hi);
      add_sample(gaps, {GapKind::kMiddle, active[j].id, active[j + 1].id}, s,
                 reach + p.eps_mid, active[j + 1].lo - p.eps_mid);
    }
    reach = std::max(reach, active.back().hi);
    add_sample(gaps, {GapKind::kLeft}, s, reach, tl - p.eps_side);
  }
  for (GapCandidate& g : gaps) {
    g.min_width = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.s.size(); ++k) {
      g.min_width = std::min(g.min_width, g.width(k));
    }
    g.span_start = g.s.front();
    g.span_end = g.s.back();
  }
  std::sort(gaps.begin(), gaps.end(),
            [](const GapCandidate& a, const GapCandidate& b) {
              return std::tie(a.id.kind, a.id.lower_id, a.id.upper_id) <
                     std::tie(b.id.kind, b.id.lower_id, b.id.upper_id);
            });
  return gaps;
}

std::vector<GapCandidate> enumerate_gaps(
    const std::vector<OccupancyCorridor>& corridors, const TrackMap& track,
    const GapParams& p) {
  auto gaps = measure_gaps(corridors, track, p);
  std::erase_if(gaps, [&](const GapCandidate& g) {
    return !(g.min_width > p.w_min);
  });
  return gaps;
}

double switch_cost(const GapCandidate& g, const GapDecision& d,
                   const GapParams& p) {
  if (!d.active || g.id == *d.active) return 0.0;
  const bool same_side = (g.mean_center() >= 0.0) == (d.active_center >= 0.0);
  return same_side ? p.c0 : p.c0 + p.c1;
}

double gap_cost(const GapCandidate& g, const GapDecision& d, double d_rl,
                const GapParams& p) {
  return p.w_s / g.min_width + p.w_r * std::abs(g.mean_center() - d_rl) +
         p.w_c * switch_cost(g, d, p);
}

GapDecision select_gap(const std::vector<GapCandidate>& candidates,
                       const GapDecision& previous, double d_rl, double t_now,
                       const GapParams& p) {
  GapDecision d = previous;
  d.switched = false;
  d.blocked = false;
  if (candidates.empty()) {
    d.blocked = true;
    return d;
  }
  std::ptrdiff_t cur = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (d.active && candidates[i].id == *d.active) {
      cur = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (cur >= 0) d.active_center = candidates[cur].mean_center();

  std::vector<double> cost(candidates.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cost[i] = gap_cost(candidates[i], d, d_rl, p);
    if (i == 0) continue;
    const double diff = cost[i] - cost[best];
    if (diff < -kTieTolerance) {
      best = i;
    } else if (diff <= kTieTolerance) {
      const bool i_prev = static_cast<std::ptrdiff_t>(i) == cur;
      const bool b_prev = static_cast<std::ptrdiff_t>(best) == cur;
      if (i_prev && !b_prev) {
        best = i;
      } else if (!b_prev &&
                 std::abs(candidates[i].mean_center() - d_rl) <
                     std::abs(candidates[best].mean_center() - d_rl)) {
        best = i;
      }
    }
  }

  auto commit = [&](std::size_t i) {
    d.previous = d.active;
    d.active = candidates[i].id;
    d.active_center = candidates[i].mean_center();
    d.cost = cost[i];
    d.last_switch_time = t_now;
  };
  if (!d.active) {
    commit(best);
  } else if (cur < 0) {
    commit(best);
    ++d.forced_switches;
    d.switched = true;
  } else if (static_cast<std::ptrdiff_t>(best) != cur &&
             cost[best] < (1.0 - p.alpha) * cost[cur] &&
             d.dwell_elapsed(t_now) > p.t_dwell) {
    commit(best);
    ++d.switches;
    d.switched = true;
  } else {
    d.cost = cost[cur];
  }
  return d;
}

double target_offset(const GapCandidate& g, double w_car) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.s.size(); ++k) {
    lo = std::max(lo, g.lower[k] + 0.5 * w_car);
    hi = std::min(hi, g.upper[k] - 0.5 * w_car);
  }
  if (lo > hi) return 0.5 * (lo + hi);
  return std::clamp(g.mean_center(), lo, hi);
}

double ReferencePath::operator()(double s) const {
  if (d.empty()) return 0.0;
  const double x = (s - s0) / ds;
  if (x <= 0.0) return d.front();
  const auto i = static_cast<std::size_t>(x);
  if (i + 1 >= d.size()) return d.back();
  const double f = x - static_cast<double>(i);
  return d[i] + f * (d[i + 1] - d[i]);
}

double ReferencePath::slope(double s) const {
  if (d.size() < 2) return 0.0;
  const double x = std::clamp((s - s0) / ds, 0.0,
                              static_cast<double>(d.size() - 2));
  const auto i = static_cast<std::size_t>(x);
  return (d[i + 1] - d[i]) / ds;
}

ReferencePath synthesize_reference(double d_target, double d0, double s0,
                                   double c_start, double c_end,
                                   const TrackMap& track,
                                   const ReferenceParams& p) {
  ReferencePath ref;
  ref.kind = ReferenceKind::kThreePhase;
  ref.s0 = s0;
  ref.ds = p.step;
  ref.c_start = std::max(c_start, s0);
  ref.c_end = std::max(c_end, ref.c_start);
  ref.s_final = ref.c_end + p.exit_length;
  ref.d_target = d_target;

  const double entry = ref.c_start - s0;
  const double b1 = s0 + p.gamma1 * entry;
  const double b2 = s0 + p.gamma2 * entry;
  const double exit_offset = d_target - track.raceline_offset(ref.c_end);
  const double extent = std::max(p.extent, ref.s_final - s0);
  const std::size_t n = sample_count(extent, p.step);
  ref.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = s0 + p.step * static_cast<double>(i);
    if (s < ref.c_start) {
      // Invert the monotone longitudinal coordinate by bisection.
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bezier(s0, b1, b2, ref.c_start, mid) < s) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double u = 0.5 * (lo + hi);
      ref.d[i] = bezier(d0, d_target, d_target, d_target, u);
    } else if (s <= ref.c_end) {
      ref.d[i] = d_target;
    } else if (s <= ref.s_final) {
      const double phase = (s - ref.c_end) / (ref.s_final - ref.c_end);
      ref.d[i] = track.raceline_offset(s) +
                 exit_offset * std::cos(0.5 * std::numbers::pi * phase);
    } else {
      ref.d[i] = track.raceline_offset(s);
    }
  }
  clip_to_track(ref, track, p.w_car);
  return ref;
}

ReferencePath raceline_reference(double d0, double s0, const TrackMap& track,
                                 const ReferenceParams& p) {
  ReferencePath ref;
  ref.kind = ReferenceKind::kRaceline;
  ref.s0 = s0;
  ref.ds = p.step;
  ref.c_start = ref.c_end = s0;
  ref.s_final = s0 + p.merge_length;
  ref.d_target = track.raceline_offset(s0);
  const double offset = d0 - track.raceline_offset(s0);
  const std::size_t n = sample_count(p.extent, p.step);
  ref.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = s0 + p.step * static_cast<double>(i);
    double d = track.raceline_offset(s);
    if (s < ref.s_final) {
      d += offset * std::cos(0.5 * std::numbers::pi * (s - s0) / p.merge_length);
    }
    ref.d[i] = d;
  }
  clip_to_track(ref, track, p.w_car);
  return ref;
}

ReferencePath hold_reference(double d0, double s0, const TrackMap& track,
                             const ReferenceParams& p) {
  ReferencePath ref;
  ref.kind = ReferenceKind::kHold;
  ref.s0 = s0;
  ref.ds = p.step;
  ref.c_start = ref.c_end = ref.s_final = s0;
  ref.d_target = d0;
  ref.d.assign(sample_count(p.extent, p.step), d0);
  clip_to_track(ref, track, p.w_car);
  return ref;
}

PlanOutput plan(const TrackMap& track, const PlanInput& in,
                const GapDecision& previous,
                const ReferencePath& previous_reference,
                const PlannerParams& params) {
  PlanOutput out;
  EgoMotionModel ego = params.ego;
  ego.v_ego = in.v_ego;
  ego.v_max = in.v_max;
  for (const OpponentView& o : in.opponents) {
    if (o.lateral == nullptr || o.velocity == nullptr ||
        !o.lateral->fitted() || !o.velocity->fitted()) {
      continue;
    }
    OccupancyProfile prof =
        forward_simulate(ego, in.s_ego, *o.lateral, *o.velocity, o.s, o.id);
    if (!prof.empty()) out.corridors.push_back(build_corridor(prof, params.corridor));
  }

  if (out.corridors.empty()) {
    out.decision = previous;
    out.decision.switched = false;
    out.decision.blocked = false;
    if (out.decision.active) out.decision.previous = out.decision.active;
    out.decision.active.reset();
    out.decision.cost = 0.0;
    // A merge runs to completion from where it began; once merged the
    // reference is the raceline itself.
    const ReferencePath& pr = previous_reference;
    double d0 = in.d_ego;
    double s0 = in.s_ego;
    if (!pr.empty() && pr.kind == ReferenceKind::kRaceline) {
      const double ahead = periodic_delta(in.s_ego, pr.s0, track.length());
      if (ahead >= 0.0 && ahead < pr.s_final - pr.s0) {
        d0 = pr.d.front();
        s0 = in.s_ego - ahead;
      } else {
        d0 = track.raceline_offset(in.s_ego);
      }
    }
    out.reference = raceline_reference(d0, s0, track, params.reference);
    out.decision.d_target = out.reference.d_target;
    return out;
  }

  out.window_start = std::numeric_limits<double>::infinity();
  out.window_end = -std::numeric_limits<double>::infinity();
  for (const auto& c : out.corridors) {
    out.window_start = std::min(out.window_start, c.c_start());
    out.window_end = std::max(out.window_end, c.c_end());
  }
  out.gaps = measure_gaps(out.corridors, track, params.gaps);
  std::vector<GapCandidate> passable;
  const double d_rl =
      track.raceline_offset(0.5 * (out.window_start + out.window_end));
  // Once the interaction window reaches the ego, a gap on the far side of an
  // opponent can only be entered by crossing it.
  const bool engaged = out.window_start <= in.s_ego + params.ego.l_front;
  auto reachable = [&](const GapCandidate& g) {
    if (!engaged || g.s.empty() || g.s.front() > in.s_ego + params.ego.l_front) return true;
    std::size_t k = 0;
    while (k + 1 < g.s.size() && g.s[k] < in.s_ego) ++k;
    const double tol = 0.5 * params.reference.w_car;
    return in.d_ego >= g.lower[k] - tol && in.d_ego <= g.upper[k] + tol;
  };
  for (const GapCandidate& g : out.gaps) {
    const bool ok = g.min_width > params.gaps.w_min && reachable(g);
    out.gap_costs.push_back(ok ? gap_cost(g, previous, d_rl, params.gaps)
                               : std::numeric_limits<double>::quiet_NaN());
    if (ok) passable.push_back(g);
  }
  out.decision = select_gap(passable, previous, d_rl, in.t, params.gaps);

  if (out.decision.blocked) {
    double best = std::numeric_limits<double>::infinity();
    for (const OpponentView& o : in.opponents) {
      const double ahead = o.s - in.s_ego;
      if (ahead > -params.ego.l_rear && ahead < best) {
        best = ahead;
        out.lead_id = o.id;
      }
    }
    const ReferencePath& pr = previous_reference;
    bool reused = false;
    if (!pr.empty()) {
      const double s_equiv =
          pr.s0 + periodic_delta(in.s_ego, pr.s0, track.length());
      if (s_equiv >= pr.s0 && s_equiv <= pr.s_end() - params.reference.merge_length) {
        out.reference = pr;
        out.reference.s0 += in.s_ego - s_equiv;
        out.reference.c_start += in.s_ego - s_equiv;
        out.reference.c_end += in.s_ego - s_equiv;
        out.reference.s_final += in.s_ego - s_equiv;
        reused = true;
      }
    }
    if (!reused) {
      out.reference = hold_reference(in.d_ego, in.s_ego, track, params.reference);
    }
    return out;
  }

  for (const GapCandidate& g : passable) {
    if (g.id == *out.decision.active) out.chosen = g;
  }
  const double d_target = target_offset(*out.chosen, params.reference.w_car);
  out.decision.d_target = d_target;
  out.reference = synthesize_reference(d_target, in.d_ego, in.s_ego,
                                       out.window_start, out.window_end, track,
                                       params.reference);
  return out;
}

std::string plan_to_json(const PlanOutput& out, double t, int stride) {
  using nlohmann::json;
  json j;
  j["t"] = t;
  json gaps = json::array();
  for (std::size_t i = 0; i < out.gaps.size(); ++i) {
    const GapCandidate& g = out.gaps[i];
    json w = json::array();
    for (std::size_t k = 0; k < g.s.size(); ++k) w.push_back(g.width(k));
    const double c = i < out.gap_costs.size() ? out.gap_costs[i] : 0.0;
    gaps.push_back({{"id", g.id.str()},
                    {"min_width", g.min_width},
                    {"center", g.mean_center()},
                    {"cost", std::isfinite(c) ? json(c) : json(nullptr)},
                    {"span", {g.span_start, g.span_end}},
                    {"widths", w}});
  }
  j["gaps"] = gaps;
  json corr = json::array();
  for (const auto& c : out.corridors) {
    corr.push_back({{"id", c.profile.opponent_id},
                    {"window", {c.c_start(), c.c_end()}},
                    {"crossing", c.crossing},
                    {"v_d", c.mean_lateral_velocity}});
  }
  j["corridors"] = corr;
  const GapDecision& d = out.decision;
  j["decision"] = {{"active", d.active ? json(d.active->str()) : json(nullptr)},
                   {"previous", d.previous ? json(d.previous->str()) : json(nullptr)},
                   {"d_target", d.d_target},
                   {"cost", d.cost},
                   {"switched", d.switched},
                   {"blocked", d.blocked},
                   {"switches", d.switches},
                   {"forced_switches", d.forced_switches}};
  json ref = json::array();
  const auto step = static_cast<std::size_t>(std::max(stride, 1));
  for (std::size_t i = 0; i < out.reference.d.size(); i += step) {
    ref.push_back({out.reference.s0 + out.reference.ds * static_cast<double>(i),
                   out.reference.d[i]});
  }
  j["reference"] = ref;
  return j.dump();
}

}  // namespace overtake
