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

#ifndef OVERTAKE_SGP_HPP_
#define OVERTAKE_SGP_HPP_

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace overtake {

enum class TargetKind { kLateral, kVelocity };

/// One scalar detection of an opponent at arc length `s`.
struct Observation {
  double s = 0.0;
  double value = 0.0;
  double noise_std = 0.05;
};

/// Squared-exponential kernel hyperparameters plus the prior-mean policy.
struct SgpHyper {
  double signal_std = 0.5;   // sigma_f
  double lengthscale = 5.0;  // m
  double noise_std = 0.05;   // default detector noise
  /// Use the sample mean of the targets as a constant prior mean instead of 0.
  bool center_targets = false;
  /// Relative jitter on the inducing covariance diagonal. Directions of the
  /// inducing covariance below round-off are dropped either way.
  double jitter = 0.0;

  static SgpHyper defaults(TargetKind kind);
};

struct SgpFitOptions {
  int inducing = 30;
  SgpHyper hyper{};
  /// Track length; when set, inputs are wrapped and mirrored across the seam.
  std::optional<double> period;
  /// Explicit inducing inputs; overrides the uniform grid.
  std::optional<std::vector<double>> inducing_inputs;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Sparse GP (FITC) posterior with cached factorizations. Immutable once
/// fitted; prediction is O(M^2) per query.
class SgpModel {
 public:
  bool fitted() const { return fitted_; }
  TargetKind kind() const { return kind_; }
  const SgpHyper& hyper() const { return hyper_; }
  double prior_mean() const { return prior_mean_; }
  double noise_variance() const { return hyper_.noise_std * hyper_.noise_std; }
  const Eigen::VectorXd& inducing_inputs() const { return z_; }
  std::size_t training_size() const { return n_train_; }
  /// Set when the inputs had zero spread and the grid was widened.
  bool degenerate_input() const { return degenerate_; }

  /// Latent-function posterior at `s` (variance excludes observation noise).
  GpPrediction predict(double s) const;

 private:
  friend SgpModel fit(std::span<const Observation>, int, TargetKind,
                      const SgpFitOptions&);

  double kernel(double a, double b) const;

  bool fitted_ = false;
  bool degenerate_ = false;
  TargetKind kind_ = TargetKind::kLateral;
  SgpHyper hyper_{};
  std::optional<double> period_;
  std::size_t n_train_ = 0;
  double prior_mean_ = 0.0;
  Eigen::VectorXd z_;
  Eigen::MatrixXd root_uu_;  // P with P^T P = pinv(Kuu)
  Eigen::MatrixXd root_a_;   // G with G^T G = pinv(Kuu + Kuf Lambda^-1 Kfu)
  Eigen::VectorXd weights_;  // mean = prior + k_u(s)^T weights
};

/// Fits a FITC sparse GP with `inducing` inputs on a uniform grid spanning the
/// (seam-mirrored) observation range. Throws ContractError when inducing <= 0
/// or observations are empty. `inducing` larger than the data size is clamped.
SgpModel fit(std::span<const Observation> observations, int inducing,
             TargetKind kind, const SgpFitOptions& options);

/// Batch prediction; every query is valid (wrapped when the model is periodic).
void predict(const SgpModel& model, std::span<const double> query_s,
             std::span<double> mean, std::span<double> variance);

/// Exact dense GP regression with the same kernel, used as the latency
/// baseline for the sparse model.
class ExactGp {
 public:
  ExactGp(std::span<const Observation> observations, const SgpHyper& hyper);
  GpPrediction predict(double s) const;

 private:
  SgpHyper hyper_;
  double prior_mean_ = 0.0;
  Eigen::VectorXd x_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

/// Fixed-capacity FIFO that evicts the oldest element.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity = 1) : data_(capacity) {}

  void push(const T& value) {
    data_[(head_ + size_) % data_.size()] = value;
    if (size_ < data_.size()) {
      ++size_;
    } else {
      head_ = (head_ + 1) % data_.size();
    }
  }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  const T& operator[](std::size_t i) const {
    return data_[(head_ + i) % data_.size()];
  }
  std::vector<T> to_vector() const {
    std::vector<T> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back((*this)[i]);
    return out;
  }

 private:
  std::vector<T> data_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

struct TrackerConfig {
  int inducing = 30;         // M
  std::size_t buffer = 400;  // N_buf
  int refit_every = 20;      // N_min
  SgpHyper lateral = SgpHyper::defaults(TargetKind::kLateral);
  SgpHyper velocity = SgpHyper::defaults(TargetKind::kVelocity);
  double track_length = 0.0;  // 0 disables seam handling
};

struct Detection {
  double s = 0.0;  // m
  double d = 0.0;  // m
  double v = 0.0;  // m/s
};

/// Per-opponent observation history and fitted lateral/velocity models.
struct OpponentTrack {
  int id = 0;
  RingBuffer<Observation> d_observations;
  RingBuffer<Observation> v_observations;
  Detection current{};
  double last_update_time = 0.0;
  int new_since_fit = 0;
  int fits = 0;
  int rejected = 0;  // non-finite detections dropped
  bool refit_pending = false;
  SgpModel d_model;
  SgpModel v_model;

  OpponentTrack(int id_, const TrackerConfig& cfg)
      : id(id_), d_observations(cfg.buffer), v_observations(cfg.buffer) {}
  bool has_models() const { return d_model.fitted() && v_model.fitted(); }
};

/// Ingests one detection. Sets `refit_pending` once N_min accepted samples
/// have accumulated since the last fit; the fit itself is done by refit().
OpponentTrack update_opponent(OpponentTrack track, const Detection& detection,
                              double t, const TrackerConfig& cfg);
void ingest(OpponentTrack& track, const Detection& detection, double t,
            const TrackerConfig& cfg);
void refit(OpponentTrack& track, const TrackerConfig& cfg);

}  // namespace overtake

#endif  // OVERTAKE_SGP_HPP_
