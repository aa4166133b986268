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

#include "facelight/core.hpp"

#include <array>
#include <functional>

namespace facelight {

// Real spherical harmonics, orthonormal over S^2, Condon-Shortley phase
// omitted:
//   Y_l0  = K_l0 P_l^0(z)
//   Y_lm  = sqrt(2) K_lm P_l^m(z) cos(m phi)   m > 0
//   Y_l-m = sqrt(2) K_lm P_l^m(z) sin(m phi)   m > 0
// with K_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!). Flat index of (l, m) is
// l(l+1) + m, so a band-limited vector of order l_max has (l_max+1)^2 entries.

inline constexpr int kMaxShOrder = 20;

constexpr int sh_count(int l_max) { return (l_max + 1) * (l_max + 1); }
constexpr int sh_index(int l, int m) { return l * (l + 1) + m; }
/// Band l of flat index i.
inline int sh_band(int i) { return static_cast<int>(std::sqrt(static_cast<double>(i))); }

namespace detail {
std::array<double, (kMaxShOrder + 1) * (kMaxShOrder + 2) / 2> const& sh_normalization();
inline int tri(int l, int m) { return l * (l + 1) / 2 + m; }
}  // namespace detail

/// Evaluates all Y_lm for l <= l_max at (x, y, z) into `out`. When `grad` is
/// non-null it receives the Cartesian gradient of the polynomial extension,
/// laid out as grad[3 i + axis]. Does not validate its inputs.
template <typename Scalar>
void sh_basis_into(Scalar x, Scalar y, Scalar z, int l_max, Scalar* out, Scalar* grad = nullptr) {
  const auto& K = detail::sh_normalization();
  const Scalar sqrt2 = Scalar(std::numbers::sqrt2);
  // cos/sin(m phi) sin^m(theta) as Re/Im of (x + iy)^m.
  Scalar c_prev = Scalar(1), s_prev = Scalar(0);
  Scalar c_m = Scalar(1), s_m = Scalar(0);
  Scalar pmm = Scalar(1);  // (2m-1)!!
  for (int m = 0; m <= l_max; ++m) {
    if (m > 0) {
      c_prev = c_m;
      s_prev = s_m;
      c_m = x * c_prev - y * s_prev;
      s_m = x * s_prev + y * c_prev;
      pmm *= Scalar(2 * m - 1);
    }
    Scalar p_lm2 = Scalar(0), p_lm1 = Scalar(0), d_lm2 = Scalar(0), d_lm1 = Scalar(0);
    for (int l = m; l <= l_max; ++l) {
      Scalar p, d;
      if (l == m) {
        p = pmm;
        d = Scalar(0);
      } else if (l == m + 1) {
        p = Scalar(2 * m + 1) * z * pmm;
        d = Scalar(2 * m + 1) * pmm;
      } else {
        p = (Scalar(2 * l - 1) * z * p_lm1 - Scalar(l + m - 1) * p_lm2) / Scalar(l - m);
        d = (Scalar(2 * l - 1) * (p_lm1 + z * d_lm1) - Scalar(l + m - 1) * d_lm2) / Scalar(l - m);
      }
      p_lm2 = p_lm1;
      p_lm1 = p;
      d_lm2 = d_lm1;
      d_lm1 = d;

      const Scalar k = Scalar(K[detail::tri(l, m)]);
      if (m == 0) {
        const int i = sh_index(l, 0);
        out[i] = k * p;
        if (grad) {
          grad[3 * i] = Scalar(0);
          grad[3 * i + 1] = Scalar(0);
          grad[3 * i + 2] = k * d;
        }
      } else {
        const Scalar kk = sqrt2 * k;
        const int ip = sh_index(l, m), in = sh_index(l, -m);
        out[ip] = kk * p * c_m;
        out[in] = kk * p * s_m;
        if (grad) {
          const Scalar mm = Scalar(m);
          // d/dx (x+iy)^m = m (x+iy)^(m-1); d/dy = i m (x+iy)^(m-1).
          grad[3 * ip] = kk * p * mm * c_prev;
          grad[3 * ip + 1] = -kk * p * mm * s_prev;
          grad[3 * ip + 2] = kk * d * c_m;
          grad[3 * in] = kk * p * mm * s_prev;
          grad[3 * in + 1] = kk * p * mm * c_prev;
          grad[3 * in + 2] = kk * d * s_m;
        }
      }
    }
  }
}

/// Y_lm(dir) for l <= l_max in flat (l, m) order.
Eigen::VectorXd eval_sh_basis(const Direction& dir, int l_max);
/// Same, for a raw vector; rejects |dir| != 1 beyond 1e-9.
Eigen::VectorXd eval_sh_basis(const Vec3& dir, int l_max);

/// Half-cosine convolution coefficient: integral of Y_l0 (w . n)^+ over the
/// sphere divided by Y_l0(n). pi, 2pi/3, pi/4, 0, -pi/24, ...
double lambda_coeff(int l);

/// Attenuation exp(-l(l+1) / (2 kappa)) of band l under a vMF lobe.
inline double vmf_attenuation(int l, double kappa) { return std::exp(-0.5 * l * (l + 1) / kappa); }

/// Environment light as a per-channel SH coefficient stack (3 x (l_max+1)^2).
class SHLight {
 public:
  explicit SHLight(int l_max = 0);
  SHLight(int l_max, Eigen::MatrixXd coeffs);

  /// Light with constant radiance `value` in every direction.
  static SHLight constant(const RGB& value, int l_max = 0);

  int l_max() const { return l_max_; }
  int count() const { return sh_count(l_max_); }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  Eigen::MatrixXd& coeffs() { return coeffs_; }
  double& at(int channel, int l, int m) { return coeffs_(channel, sh_index(l, m)); }
  double at(int channel, int l, int m) const { return coeffs_(channel, sh_index(l, m)); }

  /// Unclamped reconstruction sum_lm c_lm Y_lm(dir).
  RGB radiance(const Direction& dir) const;
  /// Copy restricted (or zero-padded) to band limit l_max.
  SHLight with_order(int l_max) const;

  friend bool operator==(const SHLight& a, const SHLight& b) {
    return a.l_max_ == b.l_max_ && a.coeffs_ == b.coeffs_;
  }

 private:
  int l_max_;
  Eigen::MatrixXd coeffs_;
};

struct VmfLobe {
  Direction axis;
  double kappa;

  VmfLobe(const Direction& axis, double kappa);
};

/// sum_lm Lambda_l c_lm Y_lm(n), clamped at zero per channel.
RGB diffuse_irradiance(const SHLight& light, const Direction& n);

/// vMF density kappa / (4 pi sinh kappa) exp(kappa axis . dir), evaluated as
/// kappa / (2 pi (1 - exp(-2 kappa))) exp(kappa (axis . dir - 1)).
double vmf_pdf(const Direction& dir, const VmfLobe& lobe);

/// sum_lm exp(-l(l+1)/(2 kappa)) c_lm Y_lm(axis), clamped at zero per channel.
RGB prefiltered_specular_light(const SHLight& light, const VmfLobe& lobe);

using RadianceFn = std::function<RGB(const Vec3&)>;

/// Projects a spherical function onto SH by Gauss-Legendre x trapezoid
/// quadrature; exact for band-limited inputs once n_theta > l_max.
SHLight project_to_sh(const RadianceFn& f, int l_max, int n_theta = 64);

/// Monte-Carlo projection with n uniform-sphere samples (stratified).
SHLight project_to_sh_mc(const RadianceFn& f, int l_max, std::size_t n, std::uint64_t seed);

}  // namespace facelight
