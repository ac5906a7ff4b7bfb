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

#ifndef OVERTAKE_SPLINE_HPP_
#define OVERTAKE_SPLINE_HPP_

#include <span>
#include <vector>

namespace overtake {

/// C2 periodic cubic interpolating spline over knots t_0 < ... < t_{n-1}
/// with period T > t_{n-1} - t_0; the value at t_0 + T equals the value at t_0.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::span<const double> knots, std::span<const double> values,
                 double period);

  double operator()(double t) const { return eval(t, 0); }
  double derivative(double t) const { return eval(t, 1); }
  double second_derivative(double t) const { return eval(t, 2); }

  double period() const { return period_; }
  bool empty() const { return knots_.empty(); }

 private:
  double eval(double t, int order) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;  // second derivative at each knot
  double period_ = 0.0;
  double t0_ = 0.0;
  bool uniform_ = false;
  double step_ = 0.0;
};

}  // namespace overtake

#endif  // OVERTAKE_SPLINE_HPP_
