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

#include "overtake/ptc_qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <deque>
#include <limits>

#include "overtake/common.hpp"

namespace overtake {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Split {
  MatrixXd D;
  VectorXd b;
  std::vector<Index> source_row;
  std::vector<int> source_sign;
  MatrixXd C;
  VectorXd p;
  std::vector<Index> eq_row;
};

Split split_rows(const DenseQp& qp) {
  Split sp;
  const Index n = qp.n();
  std::vector<Index> ineq_rows;
  for (Index i = 0; i < qp.m(); ++i) {
    if (qp.is_equality(i)) {
      sp.eq_row.push_back(i);
      continue;
    }
    if (std::isfinite(qp.u[i])) {
      sp.source_row.push_back(i);
      sp.source_sign.push_back(+1);
    }
    if (std::isfinite(qp.l[i])) {
      sp.source_row.push_back(i);
      sp.source_sign.push_back(-1);
    }
  }
  const auto mi = static_cast<Index>(sp.source_row.size());
  sp.D.resize(mi, n);
  sp.b.resize(mi);
  for (Index r = 0; r < mi; ++r) {
    const Index i = sp.source_row[static_cast<std::size_t>(r)];
    const int sg = sp.source_sign[static_cast<std::size_t>(r)];
    sp.D.row(r) = sg * qp.A.row(i);
    sp.b[r] = sg > 0 ? qp.u[i] : -qp.l[i];
  }
  const auto ne = static_cast<Index>(sp.eq_row.size());
  sp.C.resize(ne, n);
  sp.p.resize(ne);
  for (Index r = 0; r < ne; ++r) {
    sp.C.row(r) = qp.A.row(sp.eq_row[static_cast<std::size_t>(r)]);
    sp.p[r] = qp.l[sp.eq_row[static_cast<std::size_t>(r)]];
  }
  return sp;
}

bool positive_definite(const Eigen::LDLT<MatrixXd>& f) {
  return f.info() == Eigen::Success && f.isPositive() &&
         (f.vectorD().size() == 0 || f.vectorD().minCoeff() > 0.0);
}

double power_norm(const MatrixXd& g) {
  if (g.rows() == 0) return 0.0;
  // A structured start such as the ones vector can lie in the null space;
  // use a fixed irregular vector.
  VectorXd v(g.rows());
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (Index i = 0; i < v.size(); ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    const VectorXd w = g * v;
    const double nw = w.norm();
    if (!(nw > 0.0)) break;
    const double prev = lambda;
    lambda = nw;
    v = w / nw;
    if (std::abs(lambda - prev) <= 1e-6 * lambda) break;
  }
  // The power estimate approaches from below; the diagonal bounds it too.
  return std::max(lambda, g.diagonal().maxCoeff());
}

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Standard-sign residual: x = h - G lambda, b - x is the dual gradient.
VectorXd residual(const ReducedSystem& sys, const VectorXd& lam,
                  const VectorXd& g_lam, ResidualForm form) {
  const VectorXd slack = sys.b - (sys.h - g_lam);
  if (form == ResidualForm::kCoupled) return lam.cwiseMin(slack);
  return (-slack).cwiseMax(0.0);
}

// Solves [P_reg C'; C -eps2 I] [z; nu] = [r1; r2] with the cached factors.
void kkt_solve_reg(const ReducedSystem& sys, const VectorXd& r1, const VectorXd& r2,
                   VectorXd& z, VectorXd& nu) {
  z = sys.p_factor.solve(r1);
  if (sys.C.rows() == 0) {
    nu.resize(0);
    return;
  }
  nu = sys.schur_factor.solve(sys.C * z - r2);
  z.noalias() -= sys.p_factor.solve(sys.C.transpose() * nu);
}

// Regularized solve followed by iterative refinement against the exact KKT
// matrix [P C'; C 0], which removes the O(eps1) bias of the primal. A step
// is kept only while it shrinks the residual tenfold: when eps1 is not small
// against the smallest eigenvalue of P the multipliers were computed for a
// visibly different problem and the regularized primal is the consistent one.
void refined_kkt_solve(const ReducedSystem& sys, const VectorXd& r1,
                       VectorXd& z, VectorXd& nu) {
  kkt_solve_reg(sys, r1, sys.p, z, nu);
  auto kkt_error = [&](const VectorXd& zz, const VectorXd& nn, VectorXd& e1,
                       VectorXd& e2) {
    e1 = r1 - sys.P * zz;
    if (sys.C.rows() > 0) {
      e1.noalias() -= sys.C.transpose() * nn;
      e2 = sys.p - sys.C * zz;
    } else {
      e2.resize(0);
    }
    return std::max(inf_norm(e1), inf_norm(e2));
  };
  VectorXd e1, e2, dz, dnu, f1, f2;
  double err = kkt_error(z, nu, e1, e2);
  for (int it = 0; it < 3 && err > 0.0; ++it) {
    kkt_solve_reg(sys, e1, e2, dz, dnu);
    VectorXd zn = z + dz;
    VectorXd nn = sys.C.rows() > 0 ? VectorXd(nu + dnu) : nu;
    const double err_new = kkt_error(zn, nn, f1, f2);
    if (!(err_new < 0.1 * err)) break;
    z = std::move(zn);
    nu = std::move(nn);
    err = err_new;
    e1 = f1;
    e2 = f2;
  }
}

void recover(const ReducedSystem& sys, const VectorXd& lam_scaled,
             QpSolution& sol) {
  VectorXd r1 = -sys.q;
  if (lam_scaled.size() > 0) r1.noalias() -= sys.D.transpose() * lam_scaled;
  VectorXd nu;
  refined_kkt_solve(sys, r1, sol.z, nu);
  sol.lambda = lam_scaled.cwiseProduct(sys.row_scale);
}

// Active-set finish: solve [P C' Dw'; C 0 0; Dw 0 0] exactly for a working
// set W seeded with the rows carrying multipliers, dropping rows with
// negative multipliers and adding the most violated row until both signs
// and feasibility hold. Returns false (leaving `sol` alone) when the set
// does not settle within the budget or the KKT matrix turns singular.
bool polish(const ReducedSystem& sys, const VectorXd& lam, QpSolution& sol) {
  const Index n = sys.n, ne = sys.C.rows(), mi = sys.D.rows();
  const double lam_max = inf_norm(lam);
  std::vector<Index> work;
  for (Index r = 0; r < mi; ++r) {
    if (lam[r] > 1e-12 * lam_max) work.push_back(r);
  }
  // Keep the largest multipliers when the seed overdetermines z.
  const auto room = static_cast<std::size_t>(std::max<Index>(n - ne, 0));
  if (work.size() > room) {
    std::stable_sort(work.begin(), work.end(),
                     [&](Index a, Index b) { return lam[a] > lam[b]; });
    work.resize(room);
  }
  const double feas_tol = 1e-9 * (1.0 + inf_norm(sys.b));
  const int budget = 2 * static_cast<int>(n) + 10;
  VectorXd z, mu;
  for (int it = 0; it < budget; ++it) {
    const auto nw = static_cast<Index>(work.size());
    const Index dim = n + ne + nw;
    if (ne + nw > n) return false;
    MatrixXd k = MatrixXd::Zero(dim, dim);
    VectorXd rhs(dim);
    k.topLeftCorner(n, n) = sys.P;
    rhs.head(n) = -sys.q;
    for (Index e = 0; e < ne; ++e) {
      k.block(n + e, 0, 1, n) = sys.C.row(e);
      rhs[n + e] = sys.p[e];
    }
    for (Index w = 0; w < nw; ++w) {
      k.block(n + ne + w, 0, 1, n) = sys.D.row(work[static_cast<std::size_t>(w)]);
      rhs[n + ne + w] = sys.b[work[static_cast<std::size_t>(w)]];
    }
    k.topRightCorner(n, ne + nw) = k.bottomLeftCorner(ne + nw, n).transpose();
    const Eigen::FullPivLU<MatrixXd> lu(k);
    if (!lu.isInvertible()) return false;
    const VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) return false;
    z = x.head(n);
    mu = x.tail(nw);
    if (nw > 0) {
      Index worst = 0;
      const double most_negative = mu.minCoeff(&worst);
      if (most_negative < -1e-10 * (1.0 + inf_norm(mu))) {
        work.erase(work.begin() + worst);
        continue;
      }
    }
    const VectorXd slack = sys.D * z - sys.b;
    Index add = -1;
    double worst_violation = feas_tol;
    for (Index r = 0; r < mi; ++r) {
      if (slack[r] > worst_violation &&
          std::find(work.begin(), work.end(), r) == work.end()) {
        worst_violation = slack[r];
        add = r;
      }
    }
    if (add < 0) {
      VectorXd full = VectorXd::Zero(mi);
      for (Index w = 0; w < nw; ++w) full[work[static_cast<std::size_t>(w)]] = std::max(mu[w], 0.0);
      sol.z = z;
      sol.lambda = full.cwiseProduct(sys.row_scale);
      sol.residual = inf_norm(full.cwiseMin(-slack));
      return true;
    }
    work.push_back(add);
  }
  return false;
}

QpSolution fallback(const ReducedSystem& sys) {
  QpSolution sol;
  sol.status = QpStatus::kFallback;
  sol.z = sys.hp;
  sol.lambda = VectorXd::Zero(sys.D.rows());
  sol.residual = std::numeric_limits<double>::infinity();
  return sol;
}

}  // namespace

ReducedSystem reduce(const DenseQp& qp, const PtcConfig& cfg) {
  qp.validate();
  Split sp = split_rows(qp);
  ReducedSystem sys;
  const Index n = qp.n();
  sys.n = n;
  const double tr = qp.P.trace();
  sys.eps1 = cfg.eps1_rel * (tr > 0.0 ? tr / static_cast<double>(n) : 1.0);
  MatrixXd preg = qp.P;
  preg.diagonal().array() += sys.eps1;
  sys.p_factor.compute(preg);
  if (!positive_definite(sys.p_factor)) {
    throw SolverSetupError("ptc: regularized P is not positive definite");
  }
  MatrixXd pinv = sys.p_factor.solve(MatrixXd::Identity(n, n));
  pinv = 0.5 * (pinv + pinv.transpose()).eval();
  sys.hp = -pinv * qp.q;
  sys.C = std::move(sp.C);
  sys.p = std::move(sp.p);
  if (sys.C.rows() > 0) {
    const MatrixXd w = pinv * sys.C.transpose();
    MatrixXd s = sys.C * w;
    s.diagonal().array() += cfg.eps2;
    sys.schur_factor.compute(s);
    if (!positive_definite(sys.schur_factor)) {
      throw SolverSetupError("ptc: equality Schur complement is singular");
    }
    sys.Gp = pinv - w * sys.schur_factor.solve(w.transpose());
    sys.hp += w * sys.schur_factor.solve(sys.p - sys.C * sys.hp);
  } else {
    sys.Gp = std::move(pinv);
  }
  sys.Gp = 0.5 * (sys.Gp + sys.Gp.transpose()).eval();
  sys.P = qp.P;
  sys.q = qp.q;
  {
    VectorXd nu;
    refined_kkt_solve(sys, -qp.q, sys.hp, nu);
  }

  // Each one-sided row is +/- a row of A, so G follows from the Gram matrix
  // of the distinct inequality rows under Gp.
  const Index mi = sp.D.rows();
  std::vector<Index> slot(static_cast<std::size_t>(mi));
  std::vector<Index> distinct;
  for (Index r = 0; r < mi; ++r) {
    const Index i = sp.source_row[static_cast<std::size_t>(r)];
    if (distinct.empty() || distinct.back() != i) distinct.push_back(i);
    slot[static_cast<std::size_t>(r)] = static_cast<Index>(distinct.size()) - 1;
  }
  const auto mu = static_cast<Index>(distinct.size());
  MatrixXd au(mu, n);
  for (Index k = 0; k < mu; ++k) au.row(k) = qp.A.row(distinct[static_cast<std::size_t>(k)]);
  MatrixXd gram = (au * sys.Gp) * au.transpose();
  gram = 0.5 * (gram + gram.transpose()).eval();

  sys.row_scale = VectorXd::Ones(mi);
  if (cfg.equilibrate && mi > 0) {
    const double big = gram.diagonal().maxCoeff();
    for (Index r = 0; r < mi; ++r) {
      const Index k = slot[static_cast<std::size_t>(r)];
      if (gram(k, k) > 1e-14 * big && gram(k, k) > 0.0) {
        sys.row_scale[r] = 1.0 / std::sqrt(gram(k, k));
      }
    }
  }
  sys.D = sys.row_scale.asDiagonal() * sp.D;
  sys.b = sys.row_scale.cwiseProduct(sp.b);
  VectorXd coef(mi);
  VectorXd weight = VectorXd::Zero(mu);
  for (Index r = 0; r < mi; ++r) {
    coef[r] = sp.source_sign[static_cast<std::size_t>(r)] * sys.row_scale[r];
    weight[slot[static_cast<std::size_t>(r)]] += coef[r] * coef[r];
  }
  sys.G.resize(mi, mi);
  for (Index c = 0; c < mi; ++c) {
    const Index kc = slot[static_cast<std::size_t>(c)];
    for (Index r = 0; r < mi; ++r) {
      sys.G(r, c) = coef[r] * coef[c] * gram(slot[static_cast<std::size_t>(r)], kc);
    }
  }
  sys.source_row = std::move(sp.source_row);
  sys.source_sign = std::move(sp.source_sign);
  sys.h = sys.D * sys.hp;
  // G = S gram S' with S'S = diag(weight): same nonzero spectrum as the
  // symmetric mu x mu matrix below.
  const VectorXd root = weight.cwiseSqrt();
  sys.g_norm = power_norm(root.asDiagonal() * gram * root.asDiagonal());
  return sys;
}

VectorXd ptc_residual(const ReducedSystem& sys, const VectorXd& lambda,
                      ResidualForm form) {
  return residual(sys, lambda, sys.G * lambda, form);
}

QpSolution ptc_solve(const ReducedSystem& sys, const PtcConfig& cfg,
                     const VectorXd& lambda0) {
  const Index mi = sys.D.rows();
  QpSolution sol;
  if (mi == 0) {
    recover(sys, VectorXd(), sol);
    sol.status = QpStatus::kConverged;
  } else {
    VectorXd lam = VectorXd::Zero(mi);
    if (lambda0.size() == mi) {
      lam = lambda0.cwiseQuotient(sys.row_scale).cwiseMax(0.0);
    }
    const VectorXd c = sys.h - sys.b;
    const double lip = std::max(sys.g_norm, 1e-300);
    VectorXd g_lam = sys.G * lam;
    VectorXd f = residual(sys, lam, g_lam, cfg.form);
    if (!lam.allFinite() || !f.allFinite()) return fallback(sys);
    double f_norm = inf_norm(f);
    VectorXd best = lam;
    double best_norm = f_norm;
    auto merit = [&](const VectorXd& l, const VectorXd& gl) {
      return 0.5 * l.dot(gl) - c.dot(l);
    };
    std::deque<double> history{merit(lam, g_lam)};
    double step = cfg.step_scale / lip;
    int evals = 0;
    while (best_norm > cfg.tol && evals < cfg.max_iter) {
      VectorXd next, g_next;
      if (cfg.form == ResidualForm::kPrinted) {
        // The printed residual is a pure violation measure; in the
        // standard sign convention it pushes lambda up.
        next = (lam + step * f).cwiseMax(0.0);
        g_next = sys.G * next;
        ++evals;
      } else if (!cfg.adaptive) {
        next = (lam - step * f).cwiseMax(0.0);
        g_next = sys.G * next;
        ++evals;
      } else {
        const VectorXd grad = g_lam - c;
        const double ref = *std::max_element(history.begin(), history.end());
        double trial = step;
        while (true) {
          next = (lam - trial * f).cwiseMax(0.0);
          g_next = sys.G * next;
          ++evals;
          const double m_next = merit(next, g_next);
          if (!std::isfinite(m_next)) break;
          if (m_next <= ref + 1e-4 * grad.dot(next - lam) ||
              trial <= 1.0 / lip || evals >= cfg.max_iter) {
            break;
          }
          trial *= 0.5;
        }
        const VectorXd sv = next - lam;
        const double sy = sv.dot(g_next - g_lam);
        step = sy > 1e-300 ? sv.squaredNorm() / sy : 1e4 / lip;
        step = std::clamp(step, 1.0 / lip, 1e6 / lip);
        history.push_back(merit(next, g_next));
        if (static_cast<int>(history.size()) > cfg.gll_memory) history.pop_front();
      }
      if (!next.allFinite() || !g_next.allFinite()) return fallback(sys);
      lam = std::move(next);
      g_lam = std::move(g_next);
      f = residual(sys, lam, g_lam, cfg.form);
      f_norm = inf_norm(f);
      if (!std::isfinite(f_norm)) return fallback(sys);
      if (f_norm < best_norm) {
        best_norm = f_norm;
        best = lam;
      }
    }
    recover(sys, best, sol);
    sol.iterations = evals;
    sol.residual = best_norm;
    sol.status = best_norm <= cfg.tol ? QpStatus::kConverged
                                      : QpStatus::kIterationCap;
    if (cfg.polish && cfg.form == ResidualForm::kCoupled && polish(sys, best, sol)) {
      sol.status = QpStatus::kConverged;
    }
  }
  if (!sol.z.allFinite()) return fallback(sys);
  sol.objective = 0.5 * sol.z.dot(sys.P * sol.z) + sys.q.dot(sol.z);
  return sol;
}

QpSolution PtcSolver::solve(const DenseQp& qp) {
  const auto t0 = std::chrono::steady_clock::now();
  QpSolution sol;
  try {
    const ReducedSystem sys = reduce(qp, cfg_);
    VectorXd warm;
    const Index mi = sys.D.rows();
    if (warm_.size() > 0 && mi > 0) {
      warm = VectorXd::Zero(mi);
      const Index k = std::min(mi, warm_.size());
      warm.head(k) = warm_.head(k);
    }
    sol = ptc_solve(sys, cfg_, warm);
    // Two-sided multipliers; equality multipliers from the Schur system.
    sol.y = VectorXd::Zero(qp.m());
    for (std::size_t r = 0; r < sys.source_row.size(); ++r) {
      sol.y[sys.source_row[r]] += sys.source_sign[r] * sol.lambda[static_cast<Index>(r)];
    }
    if (sys.C.rows() > 0) {
      VectorXd r1 = -sys.q;
      if (sys.D.rows() > 0) {
        r1.noalias() -= sys.D.transpose() * sol.lambda.cwiseQuotient(sys.row_scale);
      }
      VectorXd z, nu;
      refined_kkt_solve(sys, r1, z, nu);
      Index k = 0;
      for (Index i = 0; i < qp.m(); ++i) {
        if (qp.is_equality(i)) sol.y[i] = nu[k++];
      }
    }
    if (sol.status == QpStatus::kFallback) {
      warm_.resize(0);
    } else {
      warm_ = sol.lambda;
    }
  } catch (const std::exception&) {
    sol = QpSolution{};
    sol.status = QpStatus::kFallback;
    sol.z = VectorXd::Zero(qp.q.size());
    sol.y = VectorXd::Zero(qp.A.rows());
    sol.residual = std::numeric_limits<double>::infinity();
    warm_.resize(0);
  }
  if (!sol.z.allFinite()) sol.z.setZero();
  sol.solve_time_us = std::chrono::duration<double, std::micro>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return sol;
}

// ---------------------------------------------------------------------------
// Reference interior-point solver.

namespace {

struct IpmResult {
  VectorXd z, nu, lam;
  bool converged = false;
  int iterations = 0;
};

double max_step(const VectorXd& x, const VectorXd& dx) {
  double a = 1.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  }
  return a;
}

IpmResult interior_point(const MatrixXd& P, const VectorXd& q, const MatrixXd& C,
                         const VectorXd& p, const MatrixXd& D, const VectorXd& b,
                         double tol, int max_iter) {
  const Index n = q.size(), ne = C.rows(), mi = D.rows();
  IpmResult res;
  res.z = VectorXd::Zero(n);
  res.nu = VectorXd::Zero(ne);
  res.lam = VectorXd::Ones(mi);
  MatrixXd kkt(n + ne, n + ne);
  kkt.setZero();
  if (ne > 0) {
    kkt.block(n, 0, ne, n) = C;
    kkt.block(0, n, n, ne) = C.transpose();
  }
  if (mi == 0) {
    kkt.topLeftCorner(n, n) = P;
    VectorXd rhs(n + ne);
    rhs << -q, p;
    const VectorXd sol = kkt.partialPivLu().solve(rhs);
    res.z = sol.head(n);
    res.nu = sol.tail(ne);
    res.converged = sol.allFinite();
    return res;
  }
  VectorXd s = (b - D * res.z).cwiseMax(1.0);
  VectorXd& z = res.z;
  VectorXd& nu = res.nu;
  VectorXd& lam = res.lam;
  const double sq = 1.0 + inf_norm(q), sp = 1.0 + inf_norm(p), sb = 1.0 + inf_norm(b);
  for (int k = 0; k < max_iter; ++k) {
    res.iterations = k;
    VectorXd rd = P * z + q + D.transpose() * lam;
    if (ne > 0) rd.noalias() += C.transpose() * nu;
    const VectorXd re = ne > 0 ? VectorXd(C * z - p) : VectorXd();
    const VectorXd ri = D * z + s - b;
    const double mu = s.dot(lam) / static_cast<double>(mi);
    if (inf_norm(rd) <= tol * sq && inf_norm(re) <= tol * sp &&
        inf_norm(ri) <= tol * sb && mu <= tol) {
      res.converged = true;
      return res;
    }
    const VectorXd w = lam.cwiseQuotient(s);
    kkt.topLeftCorner(n, n) = P + D.transpose() * w.asDiagonal() * D;
    const Eigen::PartialPivLU<MatrixXd> lu(kkt);
    auto newton = [&](const VectorXd& rc, VectorXd& dz, VectorXd& dnu,
                      VectorXd& dlam, VectorXd& ds) {
      VectorXd rhs(n + ne);
      rhs.head(n) = -rd - D.transpose() * ((lam.cwiseProduct(ri) - rc).cwiseQuotient(s));
      if (ne > 0) rhs.tail(ne) = -re;
      const VectorXd sol = lu.solve(rhs);
      dz = sol.head(n);
      dnu = sol.tail(ne);
      const VectorXd ddz = D * dz;
      dlam = (lam.cwiseProduct(ri) - rc + lam.cwiseProduct(ddz)).cwiseQuotient(s);
      ds = -ri - ddz;
    };
    VectorXd dz, dnu, dlam, ds;
    newton(s.cwiseProduct(lam), dz, dnu, dlam, ds);
    const double a_aff = std::min(max_step(s, ds), max_step(lam, dlam));
    const double mu_aff =
        (s + a_aff * ds).dot(lam + a_aff * dlam) / static_cast<double>(mi);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    const VectorXd rc = s.cwiseProduct(lam) + ds.cwiseProduct(dlam) -
                        VectorXd::Constant(mi, sigma * mu);
    newton(rc, dz, dnu, dlam, ds);
    const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(lam, dlam)));
    z += a * dz;
    nu += a * dnu;
    lam += a * dlam;
    s += a * ds;
    if (!z.allFinite() || !lam.allFinite()) return res;
  }
  return res;
}

}  // namespace

namespace {

// Exact KKT solve on the active set of an interior-point answer. Replaces
// (z, lam, nu) only when signs and feasibility hold.
bool crossover(const DenseQp& qp, const Split& sp, IpmResult& r) {
  const Index n = qp.n(), ne = sp.C.rows(), mi = sp.D.rows();
  const VectorXd slack = sp.b - sp.D * r.z;
  std::vector<Index> act;
  for (Index k = 0; k < mi; ++k) {
    if (r.lam[k] > slack[k]) act.push_back(k);
  }
  const auto na = static_cast<Index>(act.size());
  if (ne + na > n) return false;
  const Index dim = n + ne + na;
  MatrixXd kkt = MatrixXd::Zero(dim, dim);
  VectorXd rhs(dim);
  kkt.topLeftCorner(n, n) = qp.P;
  rhs.head(n) = -qp.q;
  if (ne > 0) {
    kkt.block(n, 0, ne, n) = sp.C;
    rhs.segment(n, ne) = sp.p;
  }
  for (Index a = 0; a < na; ++a) {
    kkt.block(n + ne + a, 0, 1, n) = sp.D.row(act[static_cast<std::size_t>(a)]);
    rhs[n + ne + a] = sp.b[act[static_cast<std::size_t>(a)]];
  }
  kkt.topRightCorner(n, ne + na) = kkt.bottomLeftCorner(ne + na, n).transpose();
  const Eigen::FullPivLU<MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return false;
  const VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) return false;
  const VectorXd mult = x.tail(na);
  if (na > 0 && mult.minCoeff() < 0.0) return false;
  const VectorXd z = x.head(n);
  const VectorXd viol = sp.D * z - sp.b;
  for (Index k = 0; k < mi; ++k) {
    if (viol[k] > 1e-12 * (1.0 + std::abs(sp.b[k]))) return false;
  }
  r.z = z;
  r.nu = x.segment(n, ne);
  r.lam.setZero();
  for (Index a = 0; a < na; ++a) r.lam[act[static_cast<std::size_t>(a)]] = mult[a];
  return true;
}

}  // namespace

QpSolution oracle_solve(const DenseQp& qp, const OracleConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  qp.validate();
  const Split sp = split_rows(qp);
  IpmResult r = interior_point(qp.P, qp.q, sp.C, sp.p, sp.D, sp.b, cfg.tol,
                               cfg.max_iter);
  QpSolution sol;
  auto take = [&](const IpmResult& res) {
    sol.z = res.z;
    sol.lambda = res.lam;
    sol.y = VectorXd::Zero(qp.m());
    for (std::size_t k = 0; k < sp.source_row.size(); ++k) {
      sol.y[sp.source_row[k]] += sp.source_sign[k] * res.lam[static_cast<Index>(k)];
    }
    for (std::size_t k = 0; k < sp.eq_row.size(); ++k) {
      sol.y[sp.eq_row[k]] = res.nu[static_cast<Index>(k)];
    }
    sol.residual = kkt_residual(qp, sol.z, sol.y);
  };
  take(r);
  sol.iterations = r.iterations;
  if (r.converged) {
    IpmResult exact = r;
    const double before = sol.residual;
    const QpSolution kept = sol;
    if (crossover(qp, sp, exact)) {
      take(exact);
      if (!(sol.residual < before)) sol = kept;
    }
  }
  if (r.converged && sol.residual <= cfg.kkt_check) {
    sol.status = QpStatus::kConverged;
  } else {
    // Phase 1: min t + rho/2 (|z|^2 + t^2)  s.t.  C z = p, D z - t <= b, t >= -1.
    const Index n = qp.n(), mi = sp.D.rows();
    const double rho = 1e-6;
    MatrixXd p1 = rho * MatrixXd::Identity(n + 1, n + 1);
    VectorXd q1 = VectorXd::Zero(n + 1);
    q1[n] = 1.0;
    MatrixXd c1 = MatrixXd::Zero(sp.C.rows(), n + 1);
    c1.leftCols(n) = sp.C;
    MatrixXd d1 = MatrixXd::Zero(mi + 1, n + 1);
    d1.topLeftCorner(mi, n) = sp.D;
    d1.block(0, n, mi, 1).setConstant(-1.0);
    d1(mi, n) = -1.0;
    VectorXd b1(mi + 1);
    b1 << sp.b, 1.0;
    const IpmResult f = interior_point(p1, q1, c1, sp.p, d1, b1, 1e-9, cfg.max_iter);
    sol.status = (f.converged && f.z[n] > 1e-7) ? QpStatus::kInfeasible
                                                 : QpStatus::kFailed;
  }
  sol.objective = qp.objective(sol.z);
  sol.solve_time_us = std::chrono::duration<double, std::micro>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return sol;
}

}  // namespace overtake
