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

#ifndef OVERTAKE_COMMON_HPP_
#define OVERTAKE_COMMON_HPP_

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace overtake {

/// Violated precondition of a library call (bad argument, unfitted model...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Geometric impossibility: open track loop, Frenet fold-over, ...
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point outside the extended drivable band of the track.
class OffTrackError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

/// Reduces s into [0, period).
inline double wrap_periodic(double s, double period) {
  double r = std::fmod(s, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

/// Signed shortest difference a - b on a circle of circumference `period`,
/// in [-period/2, period/2).
inline double periodic_delta(double a, double b, double period) {
  return wrap_periodic(a - b + 0.5 * period, period) - 0.5 * period;
}

}  // namespace overtake

#endif  // OVERTAKE_COMMON_HPP_
