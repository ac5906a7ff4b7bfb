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

#include "overtake/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace overtake {

using nlohmann::json;

NLOHMANN_JSON_SERIALIZE_ENUM(ResidualForm, {{ResidualForm::kCoupled, "coupled"},
                                            {ResidualForm::kPrinted, "printed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TrackingMode, {{TrackingMode::kMpc, "mpc"},
                                            {TrackingMode::kPurePursuit, "pure_pursuit"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimParams, dt, cycle, timeout, stop_overtakes,
                                   hold_time, attempt_range, clear_tolerance,
                                   noise_pos, noise_vel, shadow)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VehicleParams, length, width, wheelbase, tau_v,
                                   delta_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SpeedLimits, v_cap, a_lat, a_long)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SgpHyper, signal_std, lengthscale, noise_std,
                                   center_targets, jitter)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrackerConfig, inducing, buffer, refit_every,
                                   lateral, velocity)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EgoMotionModel, a_min, a_max, v_max, horizon, dt,
                                   l_front, l_rear)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CorridorParams, w_car, w_margin, k_sigma, w_max,
                                   dilation_window, crossing_speed, crossing_margin)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GapParams, samples, eps_side, eps_mid, w_min, w_s,
                                   w_r, w_c, c0, c1, alpha, t_dwell)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReferenceParams, gamma1, gamma2, exit_length,
                                   merge_length, extent, step, w_car)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PlannerParams, ego, corridor, gaps, reference)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PtcConfig, step_scale, max_iter, tol, eps1_rel,
                                   eps2, adaptive, gll_memory, equilibrate, form,
                                   polish)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ControllerParams, tracking, pp_lookahead_min,
                                   pp_lookahead_gain, acc_range, acc_min_gap,
                                   acc_time_gap, acc_gain, lane_clearance, v_min)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OpponentParams, lookahead_min, lookahead_gain)

void to_json(json& j, const MpcParams& p) {
  j = json{{"horizon", p.horizon},
           {"dt", p.dt},
           {"q_diag", {p.q_diag[0], p.q_diag[1], p.q_diag[2]}},
           {"r_diag", {p.r_diag[0], p.r_diag[1]}},
           {"v_max", p.v_max}};
}

void from_json(const json& j, MpcParams& p) {
  j.at("horizon").get_to(p.horizon);
  j.at("dt").get_to(p.dt);
  const auto q = j.at("q_diag").get<std::vector<double>>();
  const auto r = j.at("r_diag").get<std::vector<double>>();
  if (q.size() != 3 || r.size() != 2) {
    throw ConfigError("mpc.q_diag needs 3 entries and mpc.r_diag 2");
  }
  p.q_diag = {q[0], q[1], q[2]};
  p.r_diag = {r[0], r[1]};
  j.at("v_max").get_to(p.v_max);
}

void to_json(json& j, const SimConfig& c) {
  j = json{{"track", c.track},           {"sim", c.sim},
           {"vehicle", c.vehicle},       {"speed", c.speed},
           {"tracker", c.tracker},       {"planner", c.planner},
           {"mpc", c.mpc},               {"ptc", c.ptc},
           {"controller", c.controller}, {"opponents", c.opponents},
           {"opponent_speed", c.opponent_speed}};
}

void from_json(const json& j, SimConfig& c) {
  j.at("track").get_to(c.track);
  j.at("sim").get_to(c.sim);
  j.at("vehicle").get_to(c.vehicle);
  j.at("speed").get_to(c.speed);
  j.at("tracker").get_to(c.tracker);
  j.at("planner").get_to(c.planner);
  j.at("mpc").get_to(c.mpc);
  j.at("ptc").get_to(c.ptc);
  j.at("controller").get_to(c.controller);
  j.at("opponents").get_to(c.opponents);
  j.at("opponent_speed").get_to(c.opponent_speed);
}

namespace {

void check_keys(const json& user, const json& schema, const std::string& prefix) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (schema.at(key).is_object()) {
      if (!value.is_object()) throw ConfigError("config key '" + path + "' must be an object");
      check_keys(value, schema.at(key), path);
    }
  }
}

void validate(const SimConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(c.sim.dt > 0.0 && c.sim.cycle >= c.sim.dt, "sim.dt > 0 and sim.cycle >= sim.dt");
  require(c.sim.timeout > 0.0 && c.sim.stop_overtakes >= 1, "sim.timeout, sim.stop_overtakes");
  require(c.vehicle.wheelbase > 0.0 && c.vehicle.width > 0.0 && c.vehicle.length > 0.0,
          "vehicle geometry must be positive");
  require(c.mpc.horizon >= 1 && c.mpc.dt > 0.0, "mpc.horizon >= 1 and mpc.dt > 0");
  require(c.ptc.max_iter >= 1 && c.ptc.tol > 0.0 && c.ptc.step_scale > 0.0 &&
              c.ptc.eps1_rel > 0.0 && c.ptc.eps2 > 0.0,
          "ptc parameters must be positive");
  require(c.opponent_speed > 0.0 && c.opponent_speed <= 1.0, "opponent_speed in (0, 1]");
  require(c.tracker.inducing >= 1 && c.tracker.buffer >= 1 && c.tracker.refit_every >= 1,
          "tracker sizes must be positive");
}

}  // namespace

std::string dump_config(const SimConfig& cfg) { return json(cfg).dump(2) + "\n"; }

SimConfig parse_config(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json merged = json(SimConfig{});
  check_keys(user, merged, "");
  merged.merge_patch(user);
  SimConfig cfg;
  try {
    cfg = merged.get<SimConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a wrongly typed value: ") + e.what());
  }
  // Unknown enum strings and truncated numbers do not survive a round trip.
  const json back = json(cfg);
  const json flat = merged.flatten();
  for (const auto& entry : flat.items()) {
    const json::json_pointer ptr(entry.key());
    if (!back.contains(ptr) || back.at(ptr) != entry.value()) {
      std::string key = entry.key().substr(1);
      std::replace(key.begin(), key.end(), '/', '.');
      throw ConfigError("config key '" + key + "' has an invalid value " +
                        entry.value().dump());
    }
  }
  validate(cfg);
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void finalize(SimConfig& cfg, const TrackMap& track) {
  cfg.tracker.track_length = track.length();
  cfg.mpc.wheelbase = cfg.vehicle.wheelbase;
  cfg.mpc.w_car = cfg.vehicle.width;
  cfg.mpc.delta_max = cfg.vehicle.delta_max;
  cfg.planner.reference.w_car = cfg.vehicle.width;
  cfg.planner.corridor.w_car = cfg.vehicle.width;
  cfg.planner.ego.v_max = cfg.speed.v_cap;
}

}  // namespace overtake
