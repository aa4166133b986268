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

#include <algorithm>
#include <cstdint>

namespace facelight {

/// Counter-based generator. Draw i of stream (seed) is
///   mix64(seed ^ mix64(i))
/// where mix64 is the SplitMix64 finalizer (constants 0x9e3779b97f4a7c15,
/// 0xbf58476d1ce4e5b9, 0x94d049bb133111eb). Uniform doubles take the top 53
/// bits. Any draw can be reproduced from (seed, counter) alone.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent stream derived from a parent seed and a stream id.
  static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next_u64() { return mix64(seed_ ^ mix64(counter_++)); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (consumes two draws).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

/// Orthonormal frame with `n` as the local +z axis.
struct Frame {
  Vec3 s, t, n;

  explicit Frame(const Vec3& normal) : n(normal) {
    // Duff et al. branchless basis.
    const double sign = std::copysign(1.0, n.z());
    const double a = -1.0 / (sign + n.z());
    const double b = n.x() * n.y() * a;
    s = Vec3(1.0 + sign * n.x() * n.x() * a, sign * b, -sign * n.x());
    t = Vec3(b, sign + n.y() * n.y() * a, -n.y());
  }
  Vec3 to_world(const Vec3& local) const { return local.x() * s + local.y() * t + local.z() * n; }
};

namespace warp {

inline Vec3 uniform_sphere(double u1, double u2) {
  const double z = 1.0 - 2.0 * u1;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}
inline constexpr double kUniformSpherePdf = 1.0 / (4.0 * kPi);

inline Vec3 uniform_hemisphere(double u1, double u2) {
  const double z = u1;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}
inline constexpr double kUniformHemispherePdf = 1.0 / (2.0 * kPi);

inline Vec3 cosine_hemisphere(double u1, double u2) {
  const double r = std::sqrt(u1);
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u1))};
}
inline double cosine_hemisphere_pdf(double cos_theta) { return cos_theta > 0.0 ? cos_theta / kPi : 0.0; }

/// vMF around +z by inverse CDF of the axial cosine:
///   w = 1 + log(u1 + (1 - u1) exp(-2 kappa)) / kappa.
inline Vec3 vmf(double u1, double u2, double kappa) {
  const double w = 1.0 + std::log(u1 + (1.0 - u1) * std::exp(-2.0 * kappa)) / kappa;
  const double wc = std::clamp(w, -1.0, 1.0);
  const double r = std::sqrt(std::max(0.0, 1.0 - wc * wc));
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), wc};
}

/// Normalized Phong lobe (e + 1)/(2 pi) cos^e around +z.
inline Vec3 phong_lobe(double u1, double u2, double exponent) {
  const double z = std::pow(u1, 1.0 / (exponent + 1.0));
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}
inline double phong_lobe_pdf(double cos_theta, double exponent) {
  return cos_theta > 0.0 ? (exponent + 1.0) / (2.0 * kPi) * std::pow(cos_theta, exponent) : 0.0;
}

}  // namespace warp

/// Points in [0,1)^2: plain iid draws, or one jittered draw per cell of a
/// cols x rows grid (cols = floor(sqrt(n)), rows = floor(n / cols)). Indices
/// past the full grid fall back to iid draws, so every mode is unbiased.
class Sampler2D {
 public:
  Sampler2D(std::uint64_t seed, std::size_t n, bool stratified) : rng_(seed) {
    if (stratified && n > 0) {
      cols_ = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
      cols_ = std::max<std::size_t>(cols_, 1);
      rows_ = n / cols_;
    }
  }

  Eigen::Vector2d operator()(std::size_t i) {
    if (i >= cols_ * rows_) return {rng_.uniform(), rng_.uniform()};
    const double cx = static_cast<double>(i % cols_);
    const double cy = static_cast<double>(i / cols_);
    return {(cx + rng_.uniform()) / static_cast<double>(cols_), (cy + rng_.uniform()) / static_cast<double>(rows_)};
  }

 private:
  CounterRng rng_;
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace facelight
