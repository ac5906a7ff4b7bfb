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

#include "overtake/spline.hpp"

#include <algorithm>
#include <cmath>

#include "overtake/common.hpp"

namespace overtake {
namespace {

// Thomas algorithm for a non-cyclic tridiagonal system; a[0] and c[n-1]
// are ignored.
std::vector<double> solve_tridiagonal(std::span<const double> a,
                                      std::span<const double> b,
                                      std::span<const double> c,
                                      std::span<const double> r) {
  const std::size_t n = b.size();
  std::vector<double> cp(n), x(n);
  double denom = b[0];
  cp[0] = c[0] / denom;
  x[0] = r[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = b[i] - a[i] * cp[i - 1];
    cp[i] = c[i] / denom;
    x[i] = (r[i] - a[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  return x;
}

// Cyclic tridiagonal solve via Sherman-Morrison: a[0] couples x[0] to
// x[n-1], c[n-1] couples x[n-1] to x[0].
std::vector<double> solve_cyclic(std::vector<double> a, std::vector<double> b,
                                 std::vector<double> c,
                                 const std::vector<double>& r) {
  const std::size_t n = b.size();
  const double alpha = c[n - 1];
  const double beta = a[0];
  const double gamma = -b[0];
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;
  std::vector<double> x = solve_tridiagonal(a, b, c, r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> z = solve_tridiagonal(a, b, c, u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) /
                      (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

}  // namespace

PeriodicSpline::PeriodicSpline(std::span<const double> knots,
                               std::span<const double> values, double period)
    : knots_(knots.begin(), knots.end()),
      values_(values.begin(), values.end()),
      period_(period) {
  const std::size_t n = knots_.size();
  if (n < 3 || values_.size() != n) {
    throw ContractError("PeriodicSpline: need >= 3 knots with matching values");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw ContractError("PeriodicSpline: knots must be strictly increasing");
    }
  }
  if (!(period_ > knots_.back() - knots_.front())) {
    throw ContractError("PeriodicSpline: period shorter than knot span");
  }
  t0_ = knots_.front();

  std::vector<double> h(n);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = knots_[i + 1] - knots_[i];
  h[n - 1] = t0_ + period_ - knots_[n - 1];

  const double h_mean = period_ / static_cast<double>(n);
  uniform_ = std::all_of(h.begin(), h.end(), [&](double hi) {
    return std::abs(hi - h_mean) <= 1e-9 * h_mean;
  });
  step_ = h_mean;

  std::vector<double> a(n), b(n), c(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = (i + n - 1) % n;
    const std::size_t ip = (i + 1) % n;
    a[i] = h[im];
    b[i] = 2.0 * (h[im] + h[i]);
    c[i] = h[i];
    r[i] = 6.0 * ((values_[ip] - values_[i]) / h[i] -
                  (values_[i] - values_[im]) / h[im]);
  }
  second_ = solve_cyclic(std::move(a), std::move(b), std::move(c), r);
}

double PeriodicSpline::eval(double t, int order) const {
  if (knots_.empty()) throw ContractError("PeriodicSpline: empty spline");
  const std::size_t n = knots_.size();
  const double u = wrap_periodic(t - t0_, period_);
  std::size_t i;
  if (uniform_) {
    i = std::min(static_cast<std::size_t>(u / step_), n - 1);
  } else {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t0_ + u);
    i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
        0, std::distance(knots_.begin(), it) - 1));
  }
  const std::size_t ip = (i + 1) % n;
  const double ti = knots_[i] - t0_;
  const double h = (i + 1 < n ? knots_[i + 1] - t0_ : period_) - ti;
  const double a = h - (u - ti);  // distance to right knot
  const double b = u - ti;        // distance from left knot
  const double mi = second_[i];
  const double mj = second_[ip];
  const double yi = values_[i];
  const double yj = values_[ip];
  switch (order) {
    case 0:
      return mi * a * a * a / (6.0 * h) + mj * b * b * b / (6.0 * h) +
             (yi / h - mi * h / 6.0) * a + (yj / h - mj * h / 6.0) * b;
    case 1:
      return -mi * a * a / (2.0 * h) + mj * b * b / (2.0 * h) -
             (yi / h - mi * h / 6.0) + (yj / h - mj * h / 6.0);
    default:
      return (mi * a + mj * b) / h;
  }
}

}  // namespace overtake
