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

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "overtake/common.hpp"
#include "overtake/ptc_qp.hpp"

namespace overtake {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DenseQp scalar_qp(double lo, double hi) {
  DenseQp qp;
  qp.P = MatrixXd::Identity(1, 1);
  qp.q = VectorXd::Zero(1);
  qp.A = MatrixXd::Identity(1, 1);
  qp.l = VectorXd::Constant(1, lo);
  qp.u = VectorXd::Constant(1, hi);
  return qp;
}

TEST(Reduce, IdentityAlgebra) {
  DenseQp qp;
  qp.P = MatrixXd::Identity(3, 3);
  qp.q = VectorXd::Zero(3);
  qp.A = MatrixXd::Identity(3, 3);
  qp.l = VectorXd::Constant(3, -std::numeric_limits<double>::infinity());
  qp.u = VectorXd::Constant(3, 2.0);
  PtcConfig cfg;
  cfg.equilibrate = false;
  const ReducedSystem sys = reduce(qp, cfg);
  EXPECT_EQ(sys.D.rows(), 3);
  const double g = 1.0 / (1.0 + sys.eps1);
  EXPECT_NEAR(sys.eps1, 1e-8, 1e-20);
  EXPECT_LT((sys.Gp - g * MatrixXd::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LT(sys.hp.norm(), 1e-15);
  EXPECT_LT((sys.G - sys.Gp).norm(), 1e-15);
}

TEST(PtcSolve, LowerBoundActive) {
  PtcSolver solver;
  const QpSolution s = solver.solve(scalar_qp(1.0, std::numeric_limits<double>::infinity()));
  EXPECT_EQ(s.status, QpStatus::kConverged);
  EXPECT_NEAR(s.z[0], 1.0, 1e-6);
  ASSERT_EQ(s.lambda.size(), 1);
  EXPECT_NEAR(s.lambda[0], 1.0, 1e-6);
  EXPECT_NEAR(s.y[0], -1.0, 1e-6);
}

TEST(PtcSolve, InactiveBound) {
  PtcSolver solver;
  const QpSolution s = solver.solve(scalar_qp(-std::numeric_limits<double>::infinity(), 5.0));
  EXPECT_EQ(s.status, QpStatus::kConverged);
  EXPECT_NEAR(s.z[0], 0.0, 1e-12);
  EXPECT_EQ(s.lambda[0], 0.0);
}

TEST(Oracle, EqualityOnlyMatchesKkt) {
  std::mt19937_64 rng(4);
  const DenseQp qp = random_qp(rng, 8, 3, 50.0, 3);
  const QpSolution s = oracle_solve(qp);
  ASSERT_EQ(s.status, QpStatus::kConverged);
  MatrixXd k = MatrixXd::Zero(11, 11);
  k.topLeftCorner(8, 8) = qp.P;
  k.topRightCorner(8, 3) = qp.A.transpose();
  k.bottomLeftCorner(3, 8) = qp.A;
  VectorXd rhs(11);
  rhs << -qp.q, qp.l;
  const VectorXd sol = k.fullPivLu().solve(rhs);
  EXPECT_LT((s.z - sol.head(8)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Oracle, BoxWithDiagonalPIsClamp) {
  DenseQp qp;
  qp.P = VectorXd::LinSpaced(5, 1.0, 5.0).asDiagonal();
  qp.q = (VectorXd(5) << 3.0, -4.0, 0.5, 10.0, -0.2).finished();
  qp.A = MatrixXd::Identity(5, 5);
  qp.l = VectorXd::Constant(5, -1.0);
  qp.u = VectorXd::Constant(5, 1.0);
  const QpSolution s = oracle_solve(qp);
  ASSERT_EQ(s.status, QpStatus::kConverged);
  for (int i = 0; i < 5; ++i) {
    const double unc = -qp.q[i] / qp.P(i, i);
    EXPECT_NEAR(s.z[i], std::clamp(unc, -1.0, 1.0), 1e-8);
  }
}

TEST(Oracle, DetectsInfeasible) {
  DenseQp qp;
  qp.P = MatrixXd::Identity(2, 2);
  qp.q = VectorXd::Zero(2);
  qp.A = (MatrixXd(2, 2) << 1, 0, -1, 0).finished();
  qp.l = VectorXd::Constant(2, -std::numeric_limits<double>::infinity());
  qp.u = (VectorXd(2) << -1.0, -1.0).finished();  // x <= -1 and x >= 1
  EXPECT_EQ(oracle_solve(qp).status, QpStatus::kInfeasible);
}

TEST(PtcVsOracle, RandomSuite) {
  std::mt19937_64 rng(1234);
  PtcConfig cfg;
  int failures = 0;
  double worst_obj = 0.0, worst_viol = 0.0;
  for (int i = 0; i < 150; ++i) {
    const DenseQp qp = random_qp(rng, RandomQpSpec{});
    const QpSolution ref = oracle_solve(qp);
    ASSERT_EQ(ref.status, QpStatus::kConverged);
    EXPECT_LT(kkt_residual(qp, ref.z, ref.y), 1e-7);
    PtcSolver solver(cfg);
    const QpSolution s = solver.solve(qp);
    EXPECT_LE(s.iterations, cfg.max_iter);
    const double rel = std::abs(s.objective - ref.objective) / (1.0 + std::abs(ref.objective));
    worst_obj = std::max(worst_obj, rel);
    worst_viol = std::max(worst_viol, qp.max_violation(s.z));
    if (rel > 1e-4 || qp.max_violation(s.z) > 1e-5) ++failures;
  }
  EXPECT_EQ(failures, 0) << "worst obj " << worst_obj << " viol " << worst_viol;
}

TEST(PtcVsOracle, EqualitiesHold) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 30; ++i) {
    const DenseQp qp = random_qp(rng, 12, 20, 100.0, 3);
    PtcSolver solver;
    const QpSolution s = solver.solve(qp);
    EXPECT_LT((qp.A.topRows(3) * s.z - qp.l.head(3)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(PtcVsOracle, RegularizationSensitivity) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const DenseQp qp = random_qp(rng, 10, 20, 10.0);
    PtcConfig a, b;
    a.eps1_rel = 1e-8;
    b.eps1_rel = 1e-6;
    const QpSolution sa = PtcSolver(a).solve(qp);
    const QpSolution sb = PtcSolver(b).solve(qp);
    EXPECT_LT((sa.z - sb.z).cwiseAbs().maxCoeff(), 1e-4);
  }
}

// The literal residual has fixed points that are not KKT points: any lambda
// large enough to make the rows feasible.
TEST(PtcVsOracle, PrintedResidualDisagreesWithOracle) {
  std::mt19937_64 rng(8);
  PtcConfig printed;
  printed.form = ResidualForm::kPrinted;
  int disagree = 0;
  for (int i = 0; i < 30; ++i) {
    const DenseQp qp = random_qp(rng, 10, 20, 10.0, 0, 3.0);
    const QpSolution ref = oracle_solve(qp);
    const QpSolution s = PtcSolver(printed).solve(qp);
    const double rel = std::abs(s.objective - ref.objective) / (1.0 + std::abs(ref.objective));
    if (rel > 1e-4) ++disagree;
  }
  EXPECT_GT(disagree, 10);
}

TEST(PtcSolve, AdversarialStaysFinite) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    DenseQp qp = random_qp(rng, 20, 30, 1e10);
    PtcSolver solver;
    const QpSolution s = solver.solve(qp);
    EXPECT_TRUE(s.z.allFinite());
    EXPECT_TRUE(s.status == QpStatus::kConverged || s.status == QpStatus::kIterationCap);
    EXPECT_LT(qp.max_violation(s.z), 1e-3);
  }
}

TEST(PtcSolve, NonFiniteInputFallsBack) {
  DenseQp qp = scalar_qp(1.0, 2.0);
  qp.q[0] = std::numeric_limits<double>::infinity();
  PtcSolver solver;
  const QpSolution s = solver.solve(qp);
  EXPECT_EQ(s.status, QpStatus::kFallback);
  EXPECT_TRUE(s.z.allFinite());
  EXPECT_EQ(s.iterations, 0);
}

TEST(PtcSolve, WarmStartDoesNotWorsen) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    const DenseQp qp = random_qp(rng, 30, 60, 1000.0);
    PtcSolver solver;
    const QpSolution cold = solver.solve(qp);
    const QpSolution warm = solver.solve(qp);
    // The multipliers pass through the row scaling twice.
    EXPECT_LE(warm.residual, cold.residual * (1.0 + 1e-9));
    EXPECT_LE(warm.iterations, cold.iterations);
  }
}

TEST(QpDump, RoundTrip) {
  std::mt19937_64 rng(3);
  DenseQp qp = random_qp(rng, 6, 5, 10.0, 1);
  qp.l[3] = -std::numeric_limits<double>::infinity();
  PtcConfig cfg;
  cfg.tol = 1e-9;
  cfg.adaptive = false;
  std::stringstream ss;
  write_qp_dump(ss, qp, cfg);
  PtcConfig back;
  const DenseQp qp2 = read_qp_dump(ss, &back);
  EXPECT_EQ(fingerprint(qp), fingerprint(qp2));
  EXPECT_EQ(back.tol, 1e-9);
  EXPECT_FALSE(back.adaptive);
}

TEST(QpDump, BadNumberReportsLine) {
  std::stringstream ss("overtake-qp 1\nn 1 m 0\nconfig tol 1e-6\nP\nx\n");
  try {
    read_qp_dump(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5);
  }
}

TEST(Fingerprint, SensitiveToEveryField) {
  std::mt19937_64 rng(2);
  const DenseQp qp = random_qp(rng, 4, 3, 10.0);
  DenseQp other = qp;
  other.u[2] = std::nextafter(other.u[2], 10.0);
  EXPECT_NE(fingerprint(qp), fingerprint(other));
}

}  // namespace
}  // namespace overtake
