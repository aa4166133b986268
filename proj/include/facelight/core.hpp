// Copyright 2026 The Facelight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace facelight {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RGB = Eigen::Array3d;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

inline constexpr double kPi = std::numbers::pi;

/// Raised when an operation receives inputs outside its documented domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unit-length direction. Construction normalizes; `from_unit` checks instead.
class Direction {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  Direction() : v_(0.0, 0.0, 1.0) {}
  explicit Direction(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("Direction: zero or non-finite vector");
    v_ = v / n;
  }
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  /// Wraps an already-normalized vector, rejecting it if |v| deviates from 1.
  static Direction from_unit(const Vec3& v) {
    if (std::abs(v.norm() - 1.0) > 1e-6) throw DomainError("Direction: vector is not unit-norm");
    Direction d;
    d.v_ = v;
    return d;
  }

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double dot(const Direction& o) const { return v_.dot(o.v_); }
  Direction operator-() const { return from_unit(-v_); }

 private:
  Vec3 v_;
};

/// Mirror of `omega_o` about `n`: 2(omega_o . n) n - omega_o.
inline Direction reflect(const Direction& omega_o, const Direction& n) {
  return Direction(2.0 * omega_o.dot(n) * n.vec() - omega_o.vec());
}

}  // namespace facelight
