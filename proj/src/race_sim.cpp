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

#include "overtake/race_sim.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "overtake/common.hpp"
#include "overtake/flat_traj.hpp"
#include "overtake/gap_planner.hpp"
#include "overtake/ltv_mpc.hpp"
#include "overtake/sgp.hpp"

namespace overtake {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

double path_offset(const OpponentSpec& spec, const TrackMap& track, double s) {
  switch (spec.path) {
    case PathKind::kRaceline:
    case PathKind::kShortest:
      return track.raceline_offset(s);
    case PathKind::kCenterline:
      return 0.0;
    case PathKind::kOffset:
      break;
  }
  return spec.offset;
}

VehicleState place(const TrackMap& track, double s, double d) {
  const Pose2 p = track.to_cartesian({s, d, 0.0});
  VehicleState v;
  v.x = p.x;
  v.y = p.y;
  v.theta = p.theta;
  return v;
}

struct Opponent {
  OpponentSpec spec;
  VehicleState state;
  double progress = 0.0;  // unwrapped arc length
  double d = 0.0;
  // Overtake accounting.
  double threshold = 0.0;     // ego progress lead that counts as a pass
  bool attempt_open = false;
  bool attempt_failed = false;
  double pass_start = -1.0;
  bool in_contact = false;
};

/// The same lateral profile resampled so that it starts at `s`.
ReferencePath anchored(const ReferencePath& path, double s) {
  if (path.empty() || std::abs(path.s0 - s) < 1e-12 || s >= path.s_end()) return path;
  ReferencePath out = path;
  out.s0 = s;
  out.d.clear();
  for (double x = s; x <= path.s_end() + 1e-9; x += path.ds) out.d.push_back(path(x));
  if (out.d.size() < 2) return path;
  return out;
}

/// Frenet update that keeps an unwrapped progress coordinate.
FrenetState track_state(const TrackMap& track, const VehicleState& v, double& progress) {
  const double hint = wrap_periodic(progress, track.length());
  FrenetState f = track.to_frenet(v.x, v.y, v.theta, hint);
  progress += periodic_delta(f.s, hint, track.length());
  f.s = progress;
  return f;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"SMP", "DSL", "TSO", "ONT"};
  return names;
}

Scenario make_scenario(const std::string& name, const TrackMap& track,
                       double scaler) {
  Scenario sc;
  sc.name = name;
  auto opp = [scaler](PathKind path, double offset, double spacing) {
    return OpponentSpec{path, offset, spacing, scaler};
  };
  if (name == "SMP") {
    sc.opponents = {opp(PathKind::kShortest, 0.0, 20.0)};
  } else if (name == "DSL") {
    sc.opponents = {opp(PathKind::kRaceline, 0.0, 8.0),
                    opp(PathKind::kRaceline, 0.0, 11.0)};
  } else if (name == "TSO") {
    sc.opponents = {opp(PathKind::kOffset, 0.4, 8.0),
                    opp(PathKind::kOffset, -0.4, 9.0)};
  } else if (name == "ONT") {
    double half = std::numeric_limits<double>::infinity();
    for (double s : track.grid()) {
      half = std::min({half, track.left_bound(s), -track.right_bound(s)});
    }
    sc.opponents = {opp(PathKind::kOffset, 0.25 * half, 8.0),
                    opp(PathKind::kOffset, -0.25 * half, 10.0)};
  } else {
    throw ContractError("unknown scenario '" + name + "' (expected SMP, DSL, TSO or ONT)");
  }
  return sc;
}

TrialResult run_trial(const Scenario& scenario, const TrackMap& track,
                      const SimConfig& cfg_in, std::uint64_t seed,
                      const TrialOptions& options) {
  SimConfig cfg = cfg_in;
  finalize(cfg, track);
  for (const auto& o : scenario.opponents) {
    if (!(o.spacing > 0.0) || !(o.speed_scaler > 0.0) || o.speed_scaler > 1.0) {
      throw ContractError("scenario: spacing must be > 0 and speed scaler in (0, 1]");
    }
  }
  const double lap = track.length();
  const SimParams& sp = cfg.sim;
  const VehicleParams& vp = cfg.vehicle;
  const SpeedProfile profile = SpeedProfile::raceline(track, cfg.speed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TrialResult res;
  res.scenario = scenario;
  res.seed = seed;
  res.metrics.lap_time_ego = profile.lap_time();

  VehicleState ego = place(track, scenario.ego_s0, track.raceline_offset(scenario.ego_s0));
  double ego_progress = scenario.ego_s0;
  std::vector<Opponent> opps;
  std::vector<OpponentTrack> tracks;
  for (std::size_t j = 0; j < scenario.opponents.size(); ++j) {
    Opponent o;
    o.spec = scenario.opponents[j];
    const double s0 = scenario.ego_s0 + o.spec.spacing;
    o.state = place(track, s0, path_offset(o.spec, track, s0));
    o.progress = s0;
    opps.push_back(o);
    tracks.emplace_back(static_cast<int>(j), cfg.tracker);
  }
  const int stop_overtakes = scenario.stop_overtakes > 0 ? scenario.stop_overtakes
                                                         : sp.stop_overtakes;

  const int steps_per_cycle =
      std::max(1, static_cast<int>(std::lround(sp.cycle / sp.dt)));
  const auto max_steps = static_cast<long>(std::ceil(sp.timeout / sp.dt));
  const double t_plan = cfg.mpc.horizon * cfg.mpc.dt;

  PtcSolver solver(cfg.ptc);
  GapDecision decision;
  ReferencePath reference;
  Command ego_cmd;
  std::vector<Command> opp_cmd(opps.size());
  double t_track_start = -1.0;
  double t_end = -1.0;
  std::vector<double> jerks, steer_rates;
  double prev_v = 0.0, prev_a = 0.0, prev_delta = 0.0;
  int cycle = 0;
  RunMetrics& m = res.metrics;

  for (long step = 0; step <= max_steps; ++step) {
    const double t = static_cast<double>(step) * sp.dt;
    if (step % steps_per_cycle == 0) {
      // Opponents: pure pursuit on their own path at a fixed speed profile.
      for (std::size_t j = 0; j < opps.size(); ++j) {
        Opponent& o = opps[j];
        const FrenetState f = track_state(track, o.state, o.progress);
        o.d = f.d;
        const double ld = std::max(cfg.opponents.lookahead_min,
                                   cfg.opponents.lookahead_gain * o.state.v);
        const double st = f.s + ld;
        const Pose2 target = track.to_cartesian({st, path_offset(o.spec, track, st), 0.0});
        opp_cmd[j] = {o.spec.speed_scaler * profile(f.s),
                      pure_pursuit(o.state, target.x, target.y, vp.wheelbase)};
      }

      const auto t0 = Clock::now();
      CycleRecord rec;
      CycleTiming timing;
      rec.cycle = cycle;
      rec.t = t;
      const FrenetState ego_f = track_state(track, ego, ego_progress);
      rec.s = ego_f.s;
      rec.d = ego_f.d;
      rec.v = ego.v;

      // Detections and tracker updates.
      std::vector<Detection> det(opps.size());
      for (std::size_t j = 0; j < opps.size(); ++j) {
        const VehicleState& os = opps[j].state;
        const double nx = sp.noise_pos * gauss(rng);
        const double ny = sp.noise_pos * gauss(rng);
        const double nv = sp.noise_vel * gauss(rng);
        double hint = wrap_periodic(opps[j].progress, lap);
        FrenetState f = track.to_frenet(os.x + nx, os.y + ny, os.theta, hint);
        det[j] = {f.s, f.d, std::max(0.0, os.v + nv)};
        ingest(tracks[j], det[j], t, cfg.tracker);
      }
      const int n_tracks = static_cast<int>(tracks.size());
#pragma omp parallel for schedule(static)
      for (int j = 0; j < n_tracks; ++j) {
        if (tracks[static_cast<std::size_t>(j)].refit_pending) {
          refit(tracks[static_cast<std::size_t>(j)], cfg.tracker);
        }
      }

      PlanInput in;
      in.t = t;
      in.s_ego = ego_f.s;
      in.d_ego = ego_f.d;
      in.v_ego = ego.v;
      // The planner's forward simulation has no curvature limit; give it the
      // slowest profile speed it will meet.
      in.v_max = cfg.speed.v_cap;
      for (double ds = 0.0; ds <= cfg.planner.ego.horizon * cfg.speed.v_cap; ds += 0.5) {
        in.v_max = std::min(in.v_max, profile(ego_f.s + ds));
      }
      for (std::size_t j = 0; j < opps.size(); ++j) {
        OpponentView view;
        view.id = static_cast<int>(j);
        if (tracks[j].has_models()) {
          view.lateral = &tracks[j].d_model;
          view.velocity = &tracks[j].v_model;
        }
        view.s = ego_f.s + periodic_delta(det[j].s, wrap_periodic(ego_f.s, lap), lap);
        view.d = det[j].d;
        view.v = det[j].v;
        in.opponents.push_back(view);
      }

      Command cmd{std::min(ego.v, cfg.speed.v_cap), 0.0};
      try {
        PlanOutput out = plan(track, in, decision, reference, cfg.planner);
        decision = out.decision;
        reference = out.reference;
        rec.corridors = static_cast<int>(out.corridors.size());
        rec.gap = decision.active ? decision.active->str() : "-";
        rec.blocked = decision.blocked;
        rec.switches = decision.switches;
        rec.d_target = decision.d_target;
        if (rec.corridors > 0 && t_track_start < 0.0) t_track_start = t;
        if (options.record_plans) res.plans.push_back(plan_to_json(out, t));

        // Keep distance to opponents in the ego's lane.
        double v_cap = std::numeric_limits<double>::infinity();
        const ControllerParams& cp = cfg.controller;
        for (const OpponentView& o : in.opponents) {
          const double gap = o.s - ego_f.s;
          if (gap <= 0.0 || gap > cp.acc_range) continue;
          const bool in_lane = std::abs(reference(o.s) - o.d) < cp.lane_clearance ||
                               std::abs(ego_f.d - o.d) < cp.lane_clearance;
          if (!in_lane) continue;
          v_cap = std::min(v_cap, o.v + cp.acc_gain * (gap - cp.acc_min_gap -
                                                       cp.acc_time_gap * ego.v));
        }
        v_cap = std::max(v_cap, cp.v_min);
        rec.v_cap = std::isfinite(v_cap) ? v_cap : cfg.speed.v_cap;
        // Start from the speed the first command can reach through the
        // actuation lag, then accelerate at a_long.
        const double a_long = cfg.speed.a_long;
        const double v0 = ego.v + a_long * std::max(vp.tau_v, sp.cycle);
        const double s0 = ego_f.s;
        auto v_profile = [&](double s) {
          const double reach = std::sqrt(v0 * v0 + 2.0 * a_long * std::max(0.0, s - s0));
          return std::max(cp.v_min, std::min({profile(s), v_cap, std::max(reach, cp.v_min)}));
        };

        const FlatTrajectory flat =
            fit_quintic(anchored(reference, ego_f.s), track, v_profile, t_plan);
        MpcProblem pb;
        pb.params = cfg.mpc;
        pb.ref = recover_states(flat, track, vp.wheelbase, cfg.mpc.dt, cfg.mpc.horizon,
                                {cfg.mpc.v_max, cfg.mpc.delta_max}, ego_f.s);
        pb.jacobians = linearize(track, pb.ref);
        const GapCandidate* gap = out.chosen ? &*out.chosen : nullptr;
        pb.bounds = lateral_bounds(track, pb.ref, gap, vp.width);
        const CondensedMpc cmpc = condense(pb, ego_f, lap);
        rec.relaxed_rows = cmpc.relaxed_rows;
        if (options.harvest_qps && cycle % std::max(1, options.harvest_stride) == 0) {
          res.harvested.push_back(cmpc.qp);
        }
        timing.plan_us = elapsed_us(t0);
        const MpcSolution sol = solve_mpc(cmpc, solver, sp.shadow);
        timing.ptc_us = sol.ptc_time_us;
        timing.fingerprint = sol.fingerprint;
        timing.ptc_objective = sol.ptc.objective;
        timing.ptc_iterations = sol.ptc.iterations;
        if (sol.oracle) {
          timing.oracle_us = sol.oracle_time_us;
          timing.oracle_objective = sol.oracle->objective;
        }
        rec.qp_status = to_string(sol.ptc.status);
        rec.qp_iterations = sol.ptc.iterations;
        rec.qp_residual = sol.ptc.residual;
        rec.fallback = sol.fallback;

        cmd.v = sol.v_cmd;
        cmd.delta = sol.delta_cmd;
        if (cp.tracking == TrackingMode::kPurePursuit) {
          const double ld = std::max(cp.pp_lookahead_min, cp.pp_lookahead_gain * ego.v);
          Pose2 target = track.to_cartesian(sol.x_pred.back());
          for (const FrenetState& xp : sol.x_pred) {
            const Pose2 p = track.to_cartesian(xp);
            if (std::hypot(p.x - ego.x, p.y - ego.y) >= ld) {
              target = p;
              break;
            }
          }
          cmd.delta = pure_pursuit(ego, target.x, target.y, vp.wheelbase);
        }
        cmd.v = std::min(cmd.v, v_cap);
      } catch (const std::exception& e) {
        // Flagged fallback: hold the raceline with pure pursuit at the
        // current speed (capped).
        rec.fallback = true;
        rec.fault = e.what();
        rec.qp_status = "fault";
        const double st = ego_f.s + std::max(cfg.controller.pp_lookahead_min, 0.25 * ego.v);
        const Pose2 target = track.to_cartesian({st, track.raceline_offset(st), 0.0});
        cmd.delta = pure_pursuit(ego, target.x, target.y, vp.wheelbase);
      }
      if (!std::isfinite(cmd.v) || !std::isfinite(cmd.delta)) {
        if (!rec.fallback) ++m.unflagged_failures;
        rec.fallback = true;
        cmd = {0.0, 0.0};
      }
      if (rec.fallback) ++m.fallbacks;
      cmd.delta = std::clamp(cmd.delta, -vp.delta_max, vp.delta_max);
      cmd.v = std::max(0.0, cmd.v);
      ego_cmd = cmd;
      rec.v_cmd = cmd.v;
      rec.delta_cmd = cmd.delta;

      const double a = (ego.v - prev_v) / sp.cycle;
      if (cycle >= 2) jerks.push_back(std::abs(a - prev_a) / sp.cycle);
      if (cycle >= 1) steer_rates.push_back(std::abs(cmd.delta - prev_delta) / sp.cycle);
      prev_a = a;
      prev_v = ego.v;
      prev_delta = cmd.delta;

      double min_gap = std::numeric_limits<double>::infinity();
      for (const Opponent& o : opps) {
        min_gap = std::min(min_gap, std::hypot(o.state.x - ego.x, o.state.y - ego.y));
      }
      rec.min_gap = std::isfinite(min_gap) ? min_gap : 0.0;
      rec.overtakes = m.successes;
      rec.collisions = m.collisions;
      res.cycles.push_back(std::move(rec));
      res.timings.push_back(timing);
      ++cycle;
    }

    // Integrate all vehicles.
    ego = step_vehicle(ego, ego_cmd, sp.dt, vp);
    for (std::size_t j = 0; j < opps.size(); ++j) {
      opps[j].state = step_vehicle(opps[j].state, opp_cmd[j], sp.dt, vp);
    }

    // Collision and overtake accounting on the integrated state.
    const double t_next = t + sp.dt;
    double ego_prog_now = ego_progress;
    const FrenetState ego_now = track_state(track, ego, ego_prog_now);
    const OrientedBox ego_box = footprint(ego, vp);
    for (Opponent& o : opps) {
      double prog = o.progress;
      track_state(track, o.state, prog);
      const double rel = ego_prog_now - prog;
      const bool contact = intersects(ego_box, footprint(o.state, vp));
      if (contact && !o.in_contact) ++m.collisions;
      o.in_contact = contact;
      if (!o.attempt_open && rel > o.threshold - sp.attempt_range) {
        o.attempt_open = true;
        o.attempt_failed = false;
      }
      if (contact && o.attempt_open) o.attempt_failed = true;
      if (rel > o.threshold) {
        if (o.pass_start < 0.0) o.pass_start = t_next;
        if (t_next - o.pass_start >= sp.hold_time - 1e-9) {
          ++m.attempts;
          if (!o.attempt_failed) ++m.successes;
          o.threshold += lap;
          o.attempt_open = false;
          o.attempt_failed = false;
          o.pass_start = -1.0;
        }
      } else {
        o.pass_start = -1.0;
      }
    }
    if (m.successes >= stop_overtakes) {
      const double d_rl = track.raceline_offset(ego_now.s);
      if (std::abs(ego_now.d - d_rl) < sp.clear_tolerance) {
        t_end = t_next;
        break;
      }
    }
  }
  // Attempts still open with a collision count as failed attempts.
  for (const Opponent& o : opps) {
    if (o.attempt_open && o.attempt_failed) ++m.attempts;
  }

  const double t_final = res.cycles.empty() ? 0.0 : res.cycles.back().t;
  m.sim_time = t_end >= 0.0 ? t_end : t_final;
  m.complete = m.successes >= stop_overtakes;
  m.success_rate = m.attempts > 0 ? 100.0 * m.successes / m.attempts : 0.0;
  m.maneuver_time = t_track_start >= 0.0 ? m.sim_time - t_track_start : 0.0;
  m.mean_jerk = mean(jerks);
  m.mean_steering_rate = mean(steer_rates);
  m.cycles = cycle;
  m.gap_switches = decision.switches;
  m.forced_switches = decision.forced_switches;
  return res;
}

SweepResult sweep_smax(const Scenario& scenario, const TrackMap& track,
                       const SimConfig& config, std::uint64_t seed, int trials,
                       double lo, double hi, int iterations) {
  SweepResult out;
  auto probe = [&](double scaler) {
    Scenario sc = scenario;
    for (auto& o : sc.opponents) o.speed_scaler = scaler;
    SweepProbe p;
    p.scaler = scaler;
    p.success = true;
    for (int i = 0; i < trials; ++i) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
      p.seeds.push_back(s);
      const TrialResult r = run_trial(sc, track, config, s);
      if (!r.metrics.complete || r.metrics.collisions > 0) p.success = false;
    }
    out.probes.push_back(p);
    return p.success;
  };
  if (!probe(lo)) return out;
  if (probe(hi)) {
    out.s_max = hi;
  } else {
    double good = lo, bad = hi;
    for (int it = 0; it < iterations; ++it) {
      const double mid = 0.5 * (good + bad);
      if (probe(mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    out.s_max = good;
  }
  for (const SweepProbe& a : out.probes) {
    for (const SweepProbe& b : out.probes) {
      if (a.scaler < b.scaler && !a.success && b.success) ++out.monotonicity_violations;
    }
  }
  return out;
}

void write_cycles_csv(std::ostream& out, const std::vector<CycleRecord>& cycles) {
  out << "cycle,t,s,d,v,v_cmd,delta_cmd,corridors,gap,blocked,switches,d_target,"
         "v_cap,qp_status,qp_iterations,qp_residual,relaxed_rows,fallback,"
         "overtakes,collisions,min_gap\n";
  char buf[512];
  for (const CycleRecord& r : cycles) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s,%d,%d,%.17g,%.17g,%s,%d,"
                  "%.17g,%d,%d,%d,%d,%.17g\n",
                  r.cycle, r.t, r.s, r.d, r.v, r.v_cmd, r.delta_cmd, r.corridors,
                  r.gap.c_str(), r.blocked ? 1 : 0, r.switches, r.d_target, r.v_cap,
                  r.qp_status.c_str(), r.qp_iterations, r.qp_residual, r.relaxed_rows,
                  r.fallback ? 1 : 0, r.overtakes, r.collisions, r.min_gap);
    out << buf;
  }
}

void write_timing_csv(std::ostream& out, const std::vector<CycleTiming>& timings) {
  out << "cycle,plan_us,ptc_us,oracle_us,ptc_iterations,ptc_objective,"
         "oracle_objective,fingerprint\n";
  char buf[256];
  for (std::size_t i = 0; i < timings.size(); ++i) {
    const CycleTiming& c = timings[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.3f,%.3f,%.3f,%d,%.17g,%.17g,%016llx\n", i,
                  c.plan_us, c.ptc_us, c.oracle_us, c.ptc_iterations, c.ptc_objective,
                  c.oracle_objective, static_cast<unsigned long long>(c.fingerprint));
    out << buf;
  }
}

std::string metrics_to_json(const TrialResult& r) {
  const RunMetrics& m = r.metrics;
  nlohmann::json opps = nlohmann::json::array();
  for (const OpponentSpec& o : r.scenario.opponents) {
    opps.push_back({{"spacing", o.spacing},
                    {"offset", o.offset},
                    {"speed_scaler", o.speed_scaler}});
  }
  nlohmann::json j{{"scenario", r.scenario.name},
                   {"seed", r.seed},
                   {"opponents", opps},
                   {"R_otc", m.success_rate},
                   {"sigma_T", m.maneuver_time},
                   {"mean_jerk", m.mean_jerk},
                   {"mean_steering_rate", m.mean_steering_rate},
                   {"attempts", m.attempts},
                   {"successes", m.successes},
                   {"collisions", m.collisions},
                   {"complete", m.complete},
                   {"fallbacks", m.fallbacks},
                   {"unflagged_failures", m.unflagged_failures},
                   {"cycles", m.cycles},
                   {"sim_time", m.sim_time},
                   {"gap_switches", m.gap_switches},
                   {"forced_switches", m.forced_switches},
                   {"lap_time_ego", m.lap_time_ego}};
  return j.dump(2) + "\n";
}

}  // namespace overtake
