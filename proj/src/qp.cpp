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

#include "overtake/qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "overtake/common.hpp"

namespace overtake {

double DenseQp::objective(const Eigen::VectorXd& z) const {
  return 0.5 * z.dot(P * z) + q.dot(z);
}

double DenseQp::max_violation(const Eigen::VectorXd& z) const {
  if (m() == 0) return 0.0;
  const Eigen::VectorXd az = A * z;
  double v = 0.0;
  for (Eigen::Index i = 0; i < m(); ++i) {
    if (std::isfinite(u[i])) v = std::max(v, az[i] - u[i]);
    if (std::isfinite(l[i])) v = std::max(v, l[i] - az[i]);
  }
  return v;
}

void DenseQp::validate() const {
  const Eigen::Index nn = q.size();
  if (P.rows() != nn || P.cols() != nn) {
    throw ContractError("qp: P must be n x n");
  }
  if (A.cols() != nn && A.rows() > 0) throw ContractError("qp: A must have n columns");
  if (l.size() != A.rows() || u.size() != A.rows()) {
    throw ContractError("qp: l and u must have one entry per row of A");
  }
  const double scale = 1.0 + P.cwiseAbs().maxCoeff();
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ContractError("qp: P is not symmetric");
  }
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (l[i] > u[i] || std::isnan(l[i]) || std::isnan(u[i])) {
      throw ContractError("qp: l > u at row " + std::to_string(i));
    }
  }
}

double kkt_residual(const DenseQp& qp, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& y) {
  Eigen::VectorXd stat = qp.P * z + qp.q;
  if (qp.m() > 0) stat.noalias() += qp.A.transpose() * y;
  double r = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  r = std::max(r, qp.max_violation(z));
  if (qp.m() == 0) return r;
  const Eigen::VectorXd az = qp.A * z;
  for (Eigen::Index i = 0; i < qp.m(); ++i) {
    if (qp.is_equality(i)) continue;
    if (y[i] > 0.0) {
      r = std::max(r, std::isfinite(qp.u[i]) ? y[i] * std::abs(qp.u[i] - az[i])
                                             : y[i]);
    } else if (y[i] < 0.0) {
      r = std::max(r, std::isfinite(qp.l[i]) ? -y[i] * std::abs(az[i] - qp.l[i])
                                             : -y[i]);
    }
  }
  return r;
}

std::uint64_t fingerprint(const DenseQp& qp) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const double* data, Eigen::Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  mix(qp.P.data(), qp.P.size());
  mix(qp.q.data(), qp.q.size());
  mix(qp.A.data(), qp.A.size());
  mix(qp.l.data(), qp.l.size());
  mix(qp.u.data(), qp.u.size());
  return h;
}

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kConverged:
      return "converged";
    case QpStatus::kIterationCap:
      return "iteration_cap";
    case QpStatus::kFallback:
      return "fallback";
    case QpStatus::kInfeasible:
      return "infeasible";
    case QpStatus::kFailed:
      break;
  }
  return "failed";
}

DenseQp random_qp(std::mt19937_64& rng, int n, int m, double cond,
                  int equalities, double q_scale) {
  if (n < 1 || m < 0 || equalities > m || !(cond >= 1.0)) {
    throw ContractError("random_qp: bad dimensions");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd qm = qr.householderQ();
  Eigen::VectorXd ev(n);
  for (int i = 0; i < n; ++i) ev[i] = std::exp(unit(rng) * std::log(cond));
  ev[0] = 1.0;
  if (n > 1) ev[1] = cond;

  DenseQp qp;
  qp.P = qm * ev.asDiagonal() * qm.transpose();
  qp.P = 0.5 * (qp.P + qp.P.transpose()).eval();
  qp.q.resize(n);
  for (int i = 0; i < n; ++i) qp.q[i] = q_scale * gauss(rng);
  Eigen::VectorXd z0(n);
  for (int i = 0; i < n; ++i) z0[i] = 0.1 * gauss(rng);
  qp.A.resize(m, n);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) qp.A(r, c) = gauss(rng);
    qp.A.row(r).normalize();
  }
  const Eigen::VectorXd az = qp.A * z0;
  qp.l.resize(m);
  qp.u.resize(m);
  for (int r = 0; r < m; ++r) {
    if (r < equalities) {
      qp.l[r] = qp.u[r] = az[r];
    } else {
      qp.l[r] = az[r] - (0.1 + 0.9 * unit(rng));
      qp.u[r] = az[r] + (0.1 + 0.9 * unit(rng));
    }
  }
  return qp;
}

DenseQp random_qp(std::mt19937_64& rng, const RandomQpSpec& spec) {
  std::uniform_int_distribution<int> un(spec.n_min, spec.n_max);
  const int n = un(rng);
  std::uniform_int_distribution<int> um(1, spec.m_max);
  const int m = um(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double cond = std::exp(unit(rng) * std::log(spec.cond_max));
  int eq = 0;
  if (unit(rng) < spec.eq_probability && n > 1) {
    std::uniform_int_distribution<int> ue(1, std::min({spec.eq_max, n - 1, m}));
    eq = ue(rng);
  }
  return random_qp(rng, n, m, cond, eq, spec.q_scale);
}

}  // namespace overtake
