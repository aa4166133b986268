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

#include "facelight/sh.hpp"

#include "facelight/numerics.hpp"
#include "facelight/rng.hpp"

#include <algorithm>

namespace facelight {

namespace detail {
std::array<double, (kMaxShOrder + 1) * (kMaxShOrder + 2) / 2> const& sh_normalization() {
  static const auto table = [] {
    std::array<double, (kMaxShOrder + 1) * (kMaxShOrder + 2) / 2> k{};
    for (int l = 0; l <= kMaxShOrder; ++l) {
      for (int m = 0; m <= l; ++m) {
        // (l-m)!/(l+m)! as a running product keeps this exact enough at l = 20.
        double ratio = 1.0;
        for (int j = l - m + 1; j <= l + m; ++j) ratio /= j;
        k[tri(l, m)] = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
      }
    }
    return k;
  }();
  return table;
}
}  // namespace detail

namespace {
void check_order(int l_max) {
  if (l_max < 0 || l_max > kMaxShOrder) throw DomainError("SH band limit out of range [0, 20]");
}
}  // namespace

Eigen::VectorXd eval_sh_basis(const Direction& dir, int l_max) {
  check_order(l_max);
  Eigen::VectorXd out(sh_count(l_max));
  sh_basis_into(dir.x(), dir.y(), dir.z(), l_max, out.data());
  return out;
}

Eigen::VectorXd eval_sh_basis(const Vec3& dir, int l_max) {
  if (!(std::abs(dir.norm() - 1.0) <= Direction::kUnitTolerance)) {
    throw DomainError("eval_sh_basis: direction is not unit-norm");
  }
  check_order(l_max);
  Eigen::VectorXd out(sh_count(l_max));
  sh_basis_into(dir.x(), dir.y(), dir.z(), l_max, out.data());
  return out;
}

double lambda_coeff(int l) {
  if (l < 0) throw DomainError("lambda_coeff: negative band");
  if (l == 1) return 2.0 * kPi / 3.0;
  if (l % 2 == 1) return 0.0;
  // (-1)^(l/2+1) pi / (2^(l-1) (l-1) (l+2)) * binom(l, l/2)
  double binom = 1.0;
  for (int j = 1; j <= l / 2; ++j) binom = binom * (l / 2 + j) / j;
  const double sign = (l / 2) % 2 == 0 ? -1.0 : 1.0;
  return sign * kPi / (std::ldexp(1.0, l - 1) * (l - 1.0) * (l + 2.0)) * binom;
}

SHLight::SHLight(int l_max) : l_max_(l_max) {
  check_order(l_max);
  coeffs_ = Eigen::MatrixXd::Zero(3, sh_count(l_max));
}

SHLight::SHLight(int l_max, Eigen::MatrixXd coeffs) : l_max_(l_max), coeffs_(std::move(coeffs)) {
  check_order(l_max);
  if (coeffs_.rows() != 3 || coeffs_.cols() != sh_count(l_max)) {
    throw DomainError("SHLight: coefficient stack must be 3 x (l_max+1)^2");
  }
  if (!coeffs_.allFinite()) throw DomainError("SHLight: non-finite coefficient");
}

SHLight SHLight::constant(const RGB& value, int l_max) {
  SHLight light(l_max);
  light.coeffs_.col(0) = value.matrix() * (2.0 * std::sqrt(kPi));
  return light;
}

RGB SHLight::radiance(const Direction& dir) const {
  const Eigen::VectorXd y = eval_sh_basis(dir, l_max_);
  return (coeffs_ * y).array();
}

SHLight SHLight::with_order(int l_max) const {
  SHLight out(l_max);
  const int n = std::min(count(), out.count());
  out.coeffs_.leftCols(n) = coeffs_.leftCols(n);
  return out;
}

VmfLobe::VmfLobe(const Direction& a, double k) : axis(a), kappa(k) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("VmfLobe: kappa must be positive and finite");
}

RGB diffuse_irradiance(const SHLight& light, const Direction& n) {
  Eigen::VectorXd y = eval_sh_basis(n, light.l_max());
  for (int i = 0; i < y.size(); ++i) y(i) *= lambda_coeff(sh_band(i));
  return (light.coeffs() * y).array().max(0.0);
}

double vmf_pdf(const Direction& dir, const VmfLobe& lobe) {
  const double k = lobe.kappa;
  const double norm = k / (2.0 * kPi * -std::expm1(-2.0 * k));
  return norm * std::exp(k * (lobe.axis.dot(dir) - 1.0));
}

RGB prefiltered_specular_light(const SHLight& light, const VmfLobe& lobe) {
  Eigen::VectorXd y = eval_sh_basis(lobe.axis, light.l_max());
  for (int i = 0; i < y.size(); ++i) y(i) *= vmf_attenuation(sh_band(i), lobe.kappa);
  return (light.coeffs() * y).array().max(0.0);
}

SHLight project_to_sh(const RadianceFn& f, int l_max, int n_theta) {
  check_order(l_max);
  const GaussLegendre gl = gauss_legendre(n_theta);
  const int n_phi = 2 * n_theta;
  const int k = sh_count(l_max);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, k);
  Eigen::VectorXd y(k);
  for (int i = 0; i < n_theta; ++i) {
    const double z = gl.nodes(i);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * kPi * (j + 0.5) / n_phi;
      const Vec3 d(r * std::cos(phi), r * std::sin(phi), z);
      sh_basis_into(d.x(), d.y(), d.z(), l_max, y.data());
      const double w = gl.weights(i) * 2.0 * kPi / n_phi;
      acc += (w * f(d).matrix()) * y.transpose();
    }
  }
  return SHLight(l_max, acc);
}

SHLight project_to_sh_mc(const RadianceFn& f, int l_max, std::size_t n, std::uint64_t seed) {
  check_order(l_max);
  const int k = sh_count(l_max);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, k);
  Eigen::VectorXd y(k);
  Sampler2D sampler(seed, n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d u = sampler(i);
    const Vec3 d = warp::uniform_sphere(u.x(), u.y());
    sh_basis_into(d.x(), d.y(), d.z(), l_max, y.data());
    acc += f(d).matrix() * y.transpose();
  }
  acc *= 4.0 * kPi / static_cast<double>(n);
  return SHLight(l_max, acc);
}

}  // namespace facelight
