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

#include "facelight/numerics.hpp"

#include "facelight/core.hpp"

#include <algorithm>
#include <cmath>

namespace facelight {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  GaussLegendre q{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      const double pn = n == 1 ? t : p1;
      dp = n * (t * pn - p0) / (t * t - 1.0);
      const double step = pn / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    q.nodes(i) = -t;
    q.nodes(n - 1 - i) = t;
    q.weights(i) = q.weights(n - 1 - i) = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return q;
}

double legendre(int l, double t) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= l; ++k) {
    const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return p1;
}

MonotoneCubic::MonotoneCubic(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), values_(std::move(values)) {
  const std::size_t n = values_.size();
  if (n < 2 || !(hi > lo)) throw DomainError("MonotoneCubic: need >= 2 nodes on a non-empty interval");
  h_ = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (values_[i + 1] - values_[i]) / h_;
  slopes_.assign(n, 0.0);
  slopes_[0] = delta[0];
  slopes_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    slopes_[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      slopes_[i] = slopes_[i + 1] = 0.0;
      continue;
    }
    const double a = slopes_[i] / delta[i];
    const double b = slopes_[i + 1] / delta[i];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      slopes_[i] = tau * a * delta[i];
      slopes_[i + 1] = tau * b * delta[i];
    }
  }
}

namespace {
struct Segment {
  std::size_t i;
  double s;
};
Segment locate(double x, double lo, double h, std::size_t n) {
  const double u = std::clamp((x - lo) / h, 0.0, static_cast<double>(n - 1));
  std::size_t i = std::min(static_cast<std::size_t>(u), n - 2);
  return {i, u - static_cast<double>(i)};
}
}  // namespace

double MonotoneCubic::operator()(double x) const {
  const auto [i, s] = locate(x, lo_, h_, values_.size());
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * values_[i] + (s3 - 2 * s2 + s) * h_ * slopes_[i] +
         (-2 * s3 + 3 * s2) * values_[i + 1] + (s3 - s2) * h_ * slopes_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  const auto [i, s] = locate(x, lo_, h_, values_.size());
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * values_[i] + (6 * s2 - 6 * s) * -values_[i + 1]) / h_ +
         (3 * s2 - 4 * s + 1) * slopes_[i] + (3 * s2 - 2 * s) * slopes_[i + 1];
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Eigen::Matrix3Xd fibonacci_sphere(int n) {
  Eigen::Matrix3Xd d(3, n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    d.col(i) << r * std::cos(phi), r * std::sin(phi), z;
  }
  return d;
}

}  // namespace facelight
