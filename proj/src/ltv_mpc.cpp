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

#include "overtake/ltv_mpc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "overtake/common.hpp"

namespace overtake {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kMinBoundGap = 1e-6;
constexpr double kRelaxMargin = 1e-3;

bool interpolate_gap(const GapCandidate& g, double s, double& lo, double& hi) {
  if (g.s.empty() || s < g.s.front() || s > g.s.back()) return false;
  const auto it = std::upper_bound(g.s.begin(), g.s.end(), s);
  if (it == g.s.end()) {
    lo = g.lower.back();
    hi = g.upper.back();
    return true;
  }
  const auto j = static_cast<std::size_t>(it - g.s.begin());
  const double w = (s - g.s[j - 1]) / (g.s[j] - g.s[j - 1]);
  lo = g.lower[j - 1] + w * (g.lower[j] - g.lower[j - 1]);
  hi = g.upper[j - 1] + w * (g.upper[j] - g.upper[j - 1]);
  return true;
}

}  // namespace

Eigen::Vector3d frenet_rate(const TrackMap& track, const Eigen::Vector3d& x,
                            const Eigen::Vector2d& u, double wheelbase) {
  const double kappa = track.curvature(x[0]);
  const double den = 1.0 - x[1] * kappa;
  const double s_dot = u[0] * std::cos(x[2]) / den;
  return {s_dot, u[0] * std::sin(x[2]),
          u[0] * std::tan(u[1]) / wheelbase - kappa * s_dot};
}

Eigen::Vector3d frenet_step(const TrackMap& track, const Eigen::Vector3d& x,
                            const Eigen::Vector2d& u, double dt, double wheelbase) {
  return x + dt * frenet_rate(track, x, u, wheelbase);
}

std::vector<StepJacobian> linearize(const TrackMap& track,
                                    const ReferenceStatesInputs& ref) {
  const std::size_t n = ref.v_ref.size();
  if (ref.delta_ref.size() != n || ref.x_ref.size() != n + 1) {
    throw ContractError("linearize: reference lengths are inconsistent");
  }
  const double dt = ref.dt;
  const double lwb = ref.wheelbase;
  std::vector<StepJacobian> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const FrenetState& xr = ref.x_ref[k];
    const double v = ref.v_ref[k];
    const double delta = ref.delta_ref[k];
    const double kappa = track.curvature(xr.s);
    const double dkappa = track.curvature_rate(xr.s);
    if (!std::isfinite(kappa) || !std::isfinite(dkappa)) {
      throw ContractError("linearize: curvature is not finite");
    }
    const double den = 1.0 - xr.d * kappa;
    if (!(den > 0.0)) {
      throw GeometryError("linearize: 1 - d kappa <= 0 at s = " + std::to_string(xr.s));
    }
    const double ce = std::cos(xr.dtheta);
    const double se = std::sin(xr.dtheta);
    const double s_dot = v * ce / den;
    const double sd_s = v * ce * xr.d * dkappa / (den * den);
    const double sd_d = v * ce * kappa / (den * den);
    const double sd_e = -v * se / den;

    Eigen::Matrix3d jx;
    jx << sd_s, sd_d, sd_e,
          0.0, 0.0, v * ce,
          -dkappa * s_dot - kappa * sd_s, -kappa * sd_d, -kappa * sd_e;
    Matrix32d ju;
    const double cd = std::cos(delta);
    ju << ce / den, 0.0,
          se, 0.0,
          std::tan(delta) / lwb - kappa * ce / den, v / (lwb * cd * cd);
    out[k].A = Eigen::Matrix3d::Identity() + dt * jx;
    out[k].B = dt * ju;
  }
  return out;
}

LateralBounds lateral_bounds(const TrackMap& track, const ReferenceStatesInputs& ref,
                             const GapCandidate* gap, double w_car) {
  LateralBounds b;
  const double half = 0.5 * w_car;
  for (std::size_t k = 1; k < ref.x_ref.size(); ++k) {
    const double s = ref.x_ref[k].s;
    double lo = track.right_bound(s) + half;
    double hi = track.left_bound(s) - half;
    double glo = 0.0, ghi = 0.0;
    if (gap != nullptr && interpolate_gap(*gap, s, glo, ghi)) {
      lo = std::max(lo, glo + half);
      hi = std::min(hi, ghi - half);
      ++b.corridor_steps;
    }
    b.lower.push_back(lo);
    b.upper.push_back(hi);
  }
  return b;
}

CondensedMpc condense(const MpcProblem& pb, const FrenetState& x0, double track_length) {
  const int n = static_cast<int>(pb.ref.v_ref.size());
  if (n < 1 || static_cast<int>(pb.jacobians.size()) != n ||
      static_cast<int>(pb.bounds.lower.size()) != n ||
      static_cast<int>(pb.bounds.upper.size()) != n) {
    throw ContractError("condense: problem dimensions are inconsistent");
  }
  if ((pb.params.q_diag.array() < 0.0).any() || (pb.params.r_diag.array() <= 0.0).any()) {
    throw ContractError("condense: Q must be PSD and R positive definite");
  }
  CondensedMpc c;
  const FrenetState& r0 = pb.ref.x_ref[0];
  c.x0 = {r0.s + periodic_delta(x0.s, r0.s, track_length), x0.d, x0.dtheta};
  c.dx0 = {c.x0[0] - r0.s, x0.d - r0.d, wrap_angle(x0.dtheta - r0.dtheta)};

  c.s_x = MatrixXd::Zero(3 * n, 3);
  c.s_u = MatrixXd::Zero(3 * n, 2 * n);
  c.x_ref.resize(3 * n);
  c.u_ref.resize(2 * n);
  Eigen::Matrix3d phi = Eigen::Matrix3d::Identity();
  for (int k = 0; k < n; ++k) {
    const StepJacobian& jk = pb.jacobians[static_cast<std::size_t>(k)];
    phi = jk.A * phi;
    c.s_x.block<3, 3>(3 * k, 0) = phi;
    if (k > 0) {
      c.s_u.block(3 * k, 0, 3, 2 * k) = jk.A * c.s_u.block(3 * (k - 1), 0, 3, 2 * k);
    }
    c.s_u.block<3, 2>(3 * k, 2 * k) = jk.B;
    const FrenetState& xr = pb.ref.x_ref[static_cast<std::size_t>(k + 1)];
    c.x_ref.segment<3>(3 * k) << xr.s, xr.d, xr.dtheta;
    c.u_ref.segment<2>(2 * k) << pb.ref.v_ref[static_cast<std::size_t>(k)],
        pb.ref.delta_ref[static_cast<std::size_t>(k)];
  }

  VectorXd qbar(3 * n), rbar(2 * n);
  for (int k = 0; k < n; ++k) {
    qbar.segment<3>(3 * k) = pb.params.q_diag;
    rbar.segment<2>(2 * k) = pb.params.r_diag;
  }
  const VectorXd free = c.s_x * c.dx0 - c.s_u * c.u_ref;  // dX at z = 0
  DenseQp& qp = c.qp;
  qp.P = c.s_u.transpose() * qbar.asDiagonal() * c.s_u;
  qp.P.diagonal() += rbar;
  qp.P = 0.5 * (qp.P + qp.P.transpose()).eval();
  qp.q = c.s_u.transpose() * qbar.cwiseProduct(free) - rbar.cwiseProduct(c.u_ref);

  const int m = 3 * n;
  qp.A = MatrixXd::Zero(m, 2 * n);
  qp.l.resize(m);
  qp.u.resize(m);
  VectorXd zlo(2 * n), zhi(2 * n);
  for (int j = 0; j < n; ++j) {
    zlo.segment<2>(2 * j) << 0.0, -pb.params.delta_max;
    zhi.segment<2>(2 * j) << pb.params.v_max, pb.params.delta_max;
  }
  for (int k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double shift = c.x_ref[3 * k + 1] + free[3 * k + 1];
    const auto row = c.s_u.row(3 * k + 1);
    // Range of d_k over the actuation box; a bound outside it is moved to
    // the reachable edge so the problem stays feasible row by row.
    const double reach_lo = shift + row.cwiseProduct(zlo.transpose())
                                        .cwiseMin(row.cwiseProduct(zhi.transpose()))
                                        .sum();
    const double reach_hi = shift + row.cwiseProduct(zlo.transpose())
                                        .cwiseMax(row.cwiseProduct(zhi.transpose()))
                                        .sum();
    double lo = pb.bounds.lower[kk];
    double hi = pb.bounds.upper[kk];
    bool relaxed = false;
    if (hi < reach_lo + kRelaxMargin) {
      hi = reach_lo + kRelaxMargin;
      relaxed = true;
    }
    if (lo > reach_hi - kRelaxMargin) {
      lo = reach_hi - kRelaxMargin;
      relaxed = true;
    }
    if (hi - lo < kMinBoundGap) {
      const double mid = 0.5 * (lo + hi);
      lo = mid - 0.5 * kMinBoundGap;
      hi = mid + 0.5 * kMinBoundGap;
      relaxed = true;
    }
    if (relaxed) ++c.relaxed_rows;
    qp.A.row(k) = row;
    qp.l[k] = lo - shift;
    qp.u[k] = hi - shift;
  }
  for (int j = 0; j < n; ++j) {
    qp.A(n + 2 * j, 2 * j) = 1.0;
    qp.l[n + 2 * j] = 0.0;
    qp.u[n + 2 * j] = pb.params.v_max;
    qp.A(n + 2 * j + 1, 2 * j + 1) = 1.0;
    qp.l[n + 2 * j + 1] = -pb.params.delta_max;
    qp.u[n + 2 * j + 1] = pb.params.delta_max;
  }
  return c;
}

MpcSolution solve_mpc(const CondensedMpc& mpc, PtcSolver& solver, bool shadow,
                      const OracleConfig& oracle_cfg) {
  using Clock = std::chrono::steady_clock;
  MpcSolution out;
  const int n2 = static_cast<int>(mpc.u_ref.size());
  const int n = n2 / 2;
  out.fingerprint = fingerprint(mpc.qp);
  const auto t0 = Clock::now();
  out.ptc = solver.solve(mpc.qp);
  out.ptc_time_us = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  if (shadow) {
    const DenseQp copy = mpc.qp;
    out.oracle_fingerprint = fingerprint(copy);
    const auto t1 = Clock::now();
    out.oracle = oracle_solve(copy, oracle_cfg);
    out.oracle_time_us =
        std::chrono::duration<double, std::micro>(Clock::now() - t1).count();
  }

  out.fallback = out.ptc.status == QpStatus::kFallback || out.ptc.z.size() != n2 ||
                 !out.ptc.z.allFinite();
  out.u = out.ptc.z.size() == n2 && out.ptc.z.allFinite() ? out.ptc.z : mpc.u_ref;
  // Actuation boxes are the last 2N rows; clip so fallback commands stay legal.
  for (int j = 0; j < n2; ++j) {
    out.u[j] = std::clamp(out.u[j], mpc.qp.l[n + j], mpc.qp.u[n + j]);
  }
  const VectorXd x = mpc.x_ref + mpc.s_x * mpc.dx0 + mpc.s_u * (out.u - mpc.u_ref);
  out.x_pred.push_back({mpc.x0[0], mpc.x0[1], mpc.x0[2]});
  for (int k = 0; k < n; ++k) out.x_pred.push_back({x[3 * k], x[3 * k + 1], x[3 * k + 2]});
  out.v_cmd = out.u[0];
  out.delta_cmd = out.u[1];
  return out;
}

}  // namespace overtake
