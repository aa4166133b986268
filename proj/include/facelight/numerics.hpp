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

#include <vector>

namespace facelight {

/// Gauss-Legendre nodes and weights on [-1, 1]; exact for polynomials of
/// degree < 2n.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussLegendre gauss_legendre(int n);

/// Legendre polynomial P_l(t) by the three-term recurrence.
double legendre(int l, double t);

/// Fritsch-Carlson monotone piecewise-cubic Hermite interpolant on a uniform
/// grid over [lo, hi]. Queries outside the grid clamp to the end values.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(double lo, double hi, std::vector<double> values);

  double operator()(double x) const;
  double derivative(double x) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  double h_ = 1.0;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// n quasi-uniform unit vectors on a golden-angle spiral (3 x n).
Eigen::Matrix3Xd fibonacci_sphere(int n);

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace facelight
