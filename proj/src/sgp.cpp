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

#include "overtake/sgp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "overtake/common.hpp"

namespace overtake {
namespace {

double rbf(double a, double b, double sf2, double ell) {
  const double r = (a - b) / ell;
  return sf2 * std::exp(-0.5 * r * r);
}

// Pseudo-inverse square root of a symmetric PSD matrix: rows of the result
// span the numerically nonzero eigen-directions, scaled by 1/sqrt(lambda).
// Also returns the matching square root S^1/2 U^T of the matrix itself.
struct PsdRoot {
  Eigen::MatrixXd inv;
  Eigen::MatrixXd fwd;
};

PsdRoot psd_root(const Eigen::MatrixXd& k) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) {
    throw ContractError("sgp: inducing covariance eigensolve failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = ev.cwiseAbs().maxCoeff() * static_cast<double>(k.rows()) *
                     std::numeric_limits<double>::epsilon();
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) keep += ev[i] > cut ? 1 : 0;
  const Eigen::MatrixXd u = es.eigenvectors().rightCols(keep);
  const Eigen::ArrayXd root = ev.tail(keep).array().sqrt();
  PsdRoot out;
  out.inv = root.inverse().matrix().asDiagonal() * u.transpose();
  out.fwd = Eigen::MatrixXd::Zero(k.rows(), k.rows());
  out.fwd.bottomRows(keep) = root.matrix().asDiagonal() * u.transpose();
  return out;
}

}  // namespace

SgpHyper SgpHyper::defaults(TargetKind kind) {
  SgpHyper h;
  if (kind == TargetKind::kLateral) {
    h.signal_std = 0.5;
    h.lengthscale = 5.0;
  } else {
    h.signal_std = 1.0;
    h.lengthscale = 8.0;
  }
  h.noise_std = 0.05;
  return h;
}

double SgpModel::kernel(double a, double b) const {
  return rbf(a, b, hyper_.signal_std * hyper_.signal_std, hyper_.lengthscale);
}

GpPrediction SgpModel::predict(double s) const {
  if (!fitted_) throw ContractError("sgp: predict called on an unfitted model");
  const double q = period_ ? wrap_periodic(s, *period_) : s;
  const Eigen::Index m = z_.size();
  Eigen::VectorXd k(m);
  for (Eigen::Index i = 0; i < m; ++i) k[i] = kernel(q, z_[i]);
  GpPrediction out;
  out.mean = prior_mean_ + k.dot(weights_);
  const Eigen::VectorXd v = root_uu_ * k;
  const Eigen::VectorXd w = root_a_ * k;
  const double sf2 = hyper_.signal_std * hyper_.signal_std;
  out.variance = std::max(0.0, sf2 - v.squaredNorm() + w.squaredNorm());
  return out;
}

SgpModel fit(std::span<const Observation> observations, int inducing,
             TargetKind kind, const SgpFitOptions& options) {
  if (inducing <= 0) throw ContractError("sgp: inducing count must be positive");
  if (observations.empty()) throw ContractError("sgp: no observations");
  const SgpHyper& hy = options.hyper;
  if (!(hy.signal_std > 0.0 && hy.lengthscale > 0.0 && hy.noise_std > 0.0)) {
    throw ContractError("sgp: hyperparameters must be positive");
  }

  SgpModel model;
  model.kind_ = kind;
  model.hyper_ = hy;
  model.period_ = options.period;

  // Wrap inputs and mirror a ghost band of 3 lengthscales across the seam.
  std::vector<Observation> data;
  data.reserve(observations.size());
  for (const Observation& o : observations) {
    Observation w = o;
    if (options.period) w.s = wrap_periodic(o.s, *options.period);
    data.push_back(w);
  }
  if (options.period) {
    const double period = *options.period;
    const double band = 3.0 * hy.lengthscale;
    const std::size_t n0 = data.size();
    for (std::size_t i = 0; i < n0; ++i) {
      Observation g = data[i];
      if (g.s < band) {
        g.s += period;
        data.push_back(g);
      } else if (g.s > period - band) {
        g.s -= period;
        data.push_back(g);
      }
    }
  }
  const std::size_t n = data.size();
  model.n_train_ = n;

  double mean_y = 0.0;
  for (const Observation& o : data) mean_y += o.value;
  mean_y /= static_cast<double>(n);
  model.prior_mean_ = hy.center_targets ? mean_y : 0.0;

  if (options.inducing_inputs) {
    const auto& zi = *options.inducing_inputs;
    if (zi.empty()) throw ContractError("sgp: empty inducing input list");
    model.z_ = Eigen::Map<const Eigen::VectorXd>(
        zi.data(), static_cast<Eigen::Index>(zi.size()));
  } else {
    const int m = std::min<int>(inducing, static_cast<int>(n));
    auto [lo_it, hi_it] = std::minmax_element(
        data.begin(), data.end(),
        [](const Observation& a, const Observation& b) { return a.s < b.s; });
    double lo = lo_it->s;
    double hi = hi_it->s;
    if (hi - lo < 1e-9) {
      model.degenerate_ = true;
      lo -= 0.5 * hy.lengthscale;
      hi += 0.5 * hy.lengthscale;
    }
    model.z_.resize(m);
    if (m == 1) {
      model.z_[0] = 0.5 * (lo + hi);
    } else {
      for (int i = 0; i < m; ++i) {
        model.z_[i] = lo + (hi - lo) * static_cast<double>(i) / (m - 1);
      }
    }
  }

  const Eigen::Index m = model.z_.size();
  const double sf2 = hy.signal_std * hy.signal_std;
  Eigen::MatrixXd kuu(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      kuu(i, j) = kuu(j, i) = rbf(model.z_[i], model.z_[j], sf2, hy.lengthscale);
    }
  }
  kuu.diagonal().array() += hy.jitter * sf2;
  const PsdRoot uu = psd_root(kuu);
  model.root_uu_ = uu.inv;

  Eigen::MatrixXd kuf(m, static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < n; ++c) {
    for (Eigen::Index i = 0; i < m; ++i) {
      kuf(i, static_cast<Eigen::Index>(c)) =
          rbf(model.z_[i], data[c].s, sf2, hy.lengthscale);
    }
  }
  // V = P Kuf; FITC diagonal Lambda = diag(Kff - Qff) + noise.
  const Eigen::MatrixXd v = model.root_uu_ * kuf;
  Eigen::VectorXd lambda_inv(static_cast<Eigen::Index>(n));
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < n; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const double noise = data[c].noise_std * data[c].noise_std;
    const double lam = std::max(sf2 - v.col(ci).squaredNorm(), 0.0) + noise;
    lambda_inv[ci] = 1.0 / lam;
    resid[ci] = data[c].value - model.prior_mean_;
  }
  // QR of [Lambda^-1/2 Kfu; S^1/2 U^T] factors Kuu + Kuf Lambda^-1 Kfu
  // without forming it; an SVD of the small R then gives its pseudo-inverse,
  // since the system is singular when inducing inputs crowd together.
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd stacked(nn + m, m);
  stacked.topRows(nn) = lambda_inv.cwiseSqrt().asDiagonal() * kuf.transpose();
  stacked.bottomRows(m) = uu.fwd;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn + m);
  rhs.head(nn) = lambda_inv.cwiseSqrt().cwiseProduct(resid);
  rhs.applyOnTheLeft(qr.householderQ().transpose());
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cut = sv[0] * static_cast<double>(m) * std::numeric_limits<double>::epsilon();
  Eigen::VectorXd sv_inv = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) sv_inv[i] = sv[i] > cut ? 1.0 / sv[i] : 0.0;
  // pinv(R^T R) = V S^-2 V^T, so G = S^-1 V^T and weights = G^T U^T rhs.
  model.root_a_ = sv_inv.asDiagonal() * svd.matrixV().transpose();
  model.weights_ = model.root_a_.transpose() * (svd.matrixU().transpose() * rhs.head(m));
  if (!model.weights_.allFinite()) {
    throw ContractError("sgp: FITC system is not positive definite");
  }
  model.fitted_ = true;
  return model;
}

void predict(const SgpModel& model, std::span<const double> query_s,
             std::span<double> mean, std::span<double> variance) {
  if (mean.size() != query_s.size() || variance.size() != query_s.size()) {
    throw ContractError("sgp: output spans must match the query size");
  }
  for (std::size_t i = 0; i < query_s.size(); ++i) {
    const GpPrediction p = model.predict(query_s[i]);
    mean[i] = p.mean;
    variance[i] = p.variance;
  }
}

ExactGp::ExactGp(std::span<const Observation> observations,
                 const SgpHyper& hyper)
    : hyper_(hyper) {
  const auto n = static_cast<Eigen::Index>(observations.size());
  if (n == 0) throw ContractError("exact gp: no observations");
  x_.resize(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x_[i] = observations[static_cast<std::size_t>(i)].s;
    y[i] = observations[static_cast<std::size_t>(i)].value;
  }
  prior_mean_ = hyper.center_targets ? y.mean() : 0.0;
  const double sf2 = hyper.signal_std * hyper.signal_std;
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = rbf(x_[i], x_[j], sf2, hyper.lengthscale);
    }
    const double ns = observations[static_cast<std::size_t>(i)].noise_std;
    k(i, i) += ns * ns;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw ContractError("exact gp: covariance is not positive definite");
  }
  chol_ = llt.matrixL();
  alpha_ = llt.solve((y.array() - prior_mean_).matrix());
}

GpPrediction ExactGp::predict(double s) const {
  const double sf2 = hyper_.signal_std * hyper_.signal_std;
  Eigen::VectorXd k(x_.size());
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    k[i] = rbf(s, x_[i], sf2, hyper_.lengthscale);
  }
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  return {prior_mean_ + k.dot(alpha_), std::max(0.0, sf2 - v.squaredNorm())};
}

void ingest(OpponentTrack& track, const Detection& detection, double t,
            const TrackerConfig& cfg) {
  if (!std::isfinite(detection.s) || !std::isfinite(detection.d) ||
      !std::isfinite(detection.v) || !std::isfinite(t)) {
    ++track.rejected;
    return;
  }
  const double s = cfg.track_length > 0.0
                       ? wrap_periodic(detection.s, cfg.track_length)
                       : detection.s;
  track.d_observations.push({s, detection.d, cfg.lateral.noise_std});
  track.v_observations.push({s, detection.v, cfg.velocity.noise_std});
  track.current = {s, detection.d, detection.v};
  track.last_update_time = t;
  if (++track.new_since_fit >= cfg.refit_every) {
    track.refit_pending = true;
    track.new_since_fit = 0;
  }
}

OpponentTrack update_opponent(OpponentTrack track, const Detection& detection,
                              double t, const TrackerConfig& cfg) {
  ingest(track, detection, t, cfg);
  return track;
}

void refit(OpponentTrack& track, const TrackerConfig& cfg) {
  SgpFitOptions opts;
  opts.inducing = cfg.inducing;
  if (cfg.track_length > 0.0) opts.period = cfg.track_length;
  const auto d_obs = track.d_observations.to_vector();
  const auto v_obs = track.v_observations.to_vector();
  opts.hyper = cfg.lateral;
  track.d_model = fit(d_obs, cfg.inducing, TargetKind::kLateral, opts);
  opts.hyper = cfg.velocity;
  track.v_model = fit(v_obs, cfg.inducing, TargetKind::kVelocity, opts);
  track.refit_pending = false;
  ++track.fits;
}

}  // namespace overtake
