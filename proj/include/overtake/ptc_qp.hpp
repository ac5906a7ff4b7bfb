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

#ifndef OVERTAKE_PTC_QP_HPP_
#define OVERTAKE_PTC_QP_HPP_

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "overtake/qp.hpp"

namespace overtake {

/// Raised by reduce() when a factorization fails after regularization.
class SolverSetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ResidualForm {
  kCoupled,  // F = min(lambda, b - x): zero exactly at KKT points
  kPrinted,  // F = max(x - b, 0): primal violation only, no complementarity
};

struct PtcConfig {
  /// Pseudo-time step as a fraction of 1/||G||_2 (h * beta * ||G||).
  double step_scale = 0.5;
  int max_iter = 200;          // K_max, counts every residual evaluation
  double tol = 1e-6;           // on ||F||_inf in equilibrated units
  double eps1_rel = 1e-8;      // eps_1 = eps1_rel * trace(P) / n
  double eps2 = 1e-8;
  /// Barzilai-Borwein pseudo-time step with nonmonotone backtracking
  /// instead of the fixed step.
  bool adaptive = true;
  int gll_memory = 10;
  /// Scale one-sided rows so that diag(G) = 1.
  bool equilibrate = true;
  ResidualForm form = ResidualForm::kCoupled;
  /// Exact equality-constrained KKT solve on the active set guessed from
  /// the final multipliers, kept only when it passes the KKT conditions.
  bool polish = true;
};

/// Dual reduction of a DenseQp: one-sided rows D z <= b, equalities C z = p,
/// primal map z = h' - G' D' lambda and dual operators G = D G' D',
/// h = D h'.
struct ReducedSystem {
  Eigen::Index n = 0;
  Eigen::MatrixXd D;           // one-sided rows (equilibrated)
  Eigen::VectorXd b;           // q_ineq (equilibrated)
  Eigen::VectorXd row_scale;   // equilibrated row = original row * scale
  std::vector<Eigen::Index> source_row;  // row of A for each one-sided row
  std::vector<int> source_sign;          // +1 upper bound, -1 lower bound
  Eigen::MatrixXd C;
  Eigen::VectorXd p;
  double eps1 = 0.0;
  Eigen::LDLT<Eigen::MatrixXd> p_factor;       // P + eps1 I
  Eigen::LDLT<Eigen::MatrixXd> schur_factor;   // C Preg^-1 C' + eps2 I
  Eigen::MatrixXd Gp;          // G'
  Eigen::VectorXd hp;          // h'
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  double g_norm = 0.0;         // power-iteration estimate of ||G||_2
  Eigen::MatrixXd P;           // original objective, for reporting
  Eigen::VectorXd q;
};

/// Splits, regularizes and factorizes. Throws SolverSetupError when P_reg or
/// the Schur complement cannot be factorized as positive definite.
ReducedSystem reduce(const DenseQp& qp, const PtcConfig& cfg);

/// Runs the projected pseudo-transient iteration from lambda0 (problem units,
/// length D.rows(); empty means zero). Never throws; non-finite iterates
/// resolve to Fallback with lambda = 0 and z = h'.
QpSolution ptc_solve(const ReducedSystem& sys, const PtcConfig& cfg,
                     const Eigen::VectorXd& lambda0 = {});

/// Solver instance with a warm start carried between calls. Not thread-safe;
/// use one instance per task.
class PtcSolver {
 public:
  explicit PtcSolver(PtcConfig cfg = {}) : cfg_(cfg) {}

  /// reduce + ptc_solve; setup failures also resolve to Fallback.
  QpSolution solve(const DenseQp& qp);
  void reset() { warm_.resize(0); }
  const PtcConfig& config() const { return cfg_; }
  const Eigen::VectorXd& warm_start() const { return warm_; }

 private:
  PtcConfig cfg_;
  Eigen::VectorXd warm_;
};

/// Dual residual at lambda for the given form (equilibrated units).
Eigen::VectorXd ptc_residual(const ReducedSystem& sys, const Eigen::VectorXd& lambda,
                             ResidualForm form);

struct OracleConfig {
  int max_iter = 100;
  double tol = 1e-10;
  double kkt_check = 1e-7;
};

/// Reference solver: primal-dual interior point (Mehrotra predictor-corrector)
/// on the KKT system. When it does not converge a phase-1 problem decides
/// between kInfeasible and kFailed. Converged results pass a KKT residual
/// self-check at `kkt_check`.
QpSolution oracle_solve(const DenseQp& qp, const OracleConfig& cfg = {});

/// Self-contained text serialization of a problem and solver settings.
void write_qp_dump(std::ostream& out, const DenseQp& qp, const PtcConfig& cfg);
/// Inverse of write_qp_dump; throws ParseError with the line number.
DenseQp read_qp_dump(std::istream& in, PtcConfig* cfg = nullptr);

}  // namespace overtake

#endif  // OVERTAKE_PTC_QP_HPP_
