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

#ifndef OVERTAKE_QP_HPP_
#define OVERTAKE_QP_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace overtake {

/// min 1/2 z'Pz + q'z  s.t.  l <= A z <= u. Rows with l_i == u_i are
/// equalities; infinite bounds are allowed on inequality rows.
struct DenseQp {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;

  Eigen::Index n() const { return q.size(); }
  Eigen::Index m() const { return A.rows(); }
  double objective(const Eigen::VectorXd& z) const;
  /// Largest bound violation of A z (0 when feasible).
  double max_violation(const Eigen::VectorXd& z) const;
  /// Throws ContractError on inconsistent sizes, asymmetric P or l > u.
  void validate() const;
  bool is_equality(Eigen::Index i) const { return l[i] == u[i]; }
};

/// Max of stationarity, primal infeasibility and complementarity residuals
/// of (z, y) for `qp`.
double kkt_residual(const DenseQp& qp, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& y);

/// FNV-1a hash over the raw bytes of P, q, A, l, u.
std::uint64_t fingerprint(const DenseQp& qp);

enum class QpStatus { kConverged, kIterationCap, kFallback, kInfeasible, kFailed };
const char* to_string(QpStatus s);

struct QpSolution {
  Eigen::VectorXd z;
  /// Two-sided multipliers per row of A: positive on an active upper bound,
  /// negative on an active lower bound (P z + q + A'y = 0 at the optimum).
  Eigen::VectorXd y;
  /// Multipliers of the one-sided inequality rows (>= 0), problem units.
  Eigen::VectorXd lambda;
  QpStatus status = QpStatus::kFailed;
  int iterations = 0;
  double residual = 0.0;     // infinity norm of the dual residual F
  double objective = 0.0;
  double solve_time_us = 0.0;
};

struct RandomQpSpec {
  int n_min = 2;
  int n_max = 40;
  int m_max = 80;
  double cond_max = 1e4;      // eigenvalue spread of P (log-uniform)
  double eq_probability = 0.3;
  int eq_max = 3;
  double q_scale = 1.0;
};

/// Strictly convex QP, feasible by construction: every row is satisfied with
/// margin at a hidden point z0 (equality rows pass through it).
DenseQp random_qp(std::mt19937_64& rng, const RandomQpSpec& spec);
/// Same generator with fixed dimensions.
DenseQp random_qp(std::mt19937_64& rng, int n, int m, double cond,
                  int equalities = 0, double q_scale = 1.0);

}  // namespace overtake

#endif  // OVERTAKE_QP_HPP_
