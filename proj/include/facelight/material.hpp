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

#include "facelight/ad.hpp"
#include "facelight/brdf.hpp"
#include "facelight/core.hpp"
#include "facelight/network.hpp"
#include "facelight/numerics.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace facelight {

/// Scene bounding sphere Omega (millimeters).
struct BoundingSphere {
  Vec3 center = Vec3::Zero();
  double radius = 150.0;

  bool contains(const Vec3& x, double slack = 1.0) const { return (x - center).norm() <= radius * slack; }
};

struct MaterialSample {
  RGB albedo = RGB::Constant(0.5);
  double rho = 0.0;
  double kappa = 1.0;
  Eigen::VectorXd coeffs;

  /// Throws DomainError when a range invariant is violated.
  void validate() const;
};

struct ConstantField {
  MaterialSample value;
};

/// Blends `from` into `to` along `axis`: s = clamp((x . axis - lo) / (hi - lo), 0, 1).
/// Shininess interpolates through 1/kappa.
struct LinearRampField {
  Vec3 axis = Vec3::UnitX();
  double lo = -100.0;
  double hi = 100.0;
  MaterialSample from;
  MaterialSample to;
};

/// Constant albedo, rho and kappa with two basis weights
/// c = (s, 1 - s), s = logistic(((x - center) . axis) / width).
struct TwoLobeField {
  RGB albedo = RGB::Constant(0.5);
  double rho = 0.06;
  double kappa = 64.0;
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitY();
  double width = 20.0;
};

/// Sinusoidal network over (x - center) / radius. Raw outputs are
/// (albedo[3], rho, inverse shininess, c[k]) with logistic, logistic,
/// softplus and identity transforms.
struct NetworkField {
  Mlp mlp;
  int k = 3;
  BoundingSphere frame;
};

using MaterialField = std::variant<ConstantField, LinearRampField, TwoLobeField, NetworkField>;

/// Number of basis coefficients the field produces.
int coeff_count(const MaterialField& field);

/// Batched material parameters; each node has one column per point.
struct MaterialNodes {
  ad::Node albedo;  // 3 x n
  ad::Node rho;     // 1 x n
  ad::Node inv_kappa;  // 1 x n, 1 / kappa
  ad::Node coeffs;  // k x n
};

/// Evaluates the field at a single position; rejects x outside 1.1 x Omega.
MaterialSample eval_material(const MaterialField& field, const ParamTape& tape, const Vec3& x,
                             const BoundingSphere& omega);
/// Batched evaluation at the columns of a 3 x n position node.
MaterialNodes eval_material(ad::Graph& g, const MaterialField& field, const ParamTape& tape, const ad::Node& x);

/// Tabulation settings for analytic bases.
struct BasisTableOptions {
  int nodes = 128;
  std::size_t samples_per_node = std::size_t{1} << 16;
  std::uint64_t seed = 0x5eed;
};

/// Analytic basis: one tabulated integral B_j(omega_o . n) per source BRDF.
struct AnalyticBasis {
  std::vector<AnalyticBrdf> sources;
  std::vector<MonotoneCubic> tables;
  BasisTableOptions options;
};

/// Learned basis over the 7-vector (omega_o, n, omega_o . n).
struct NetworkBasis {
  Mlp mlp;
};

using IntegratedBasisFn = std::variant<AnalyticBasis, NetworkBasis>;

inline constexpr int kDefaultBasisCount = 3;

int basis_count(const IntegratedBasisFn& basis);

/// Raised for queries with omega_o . n <= 0.
class BackFacingError : public DomainError {
 public:
  using DomainError::DomainError;
};

Eigen::VectorXd eval_integrated_basis(const IntegratedBasisFn& basis, const ParamTape& tape, const Direction& omega_o,
                                      const Direction& n);
/// Batched variant over 3 x n directions; mu is the 1 x n cosine omega_o . n.
/// Callers mask back-facing columns themselves.
ad::Node eval_integrated_basis(ad::Graph& g, const IntegratedBasisFn& basis, const ParamTape& tape,
                               const ad::Node& omega_o, const ad::Node& n, const ad::Node& mu);

/// rho max(c . B, 0) prefiltered.
RGB specular_radiance(const MaterialSample& m, const Eigen::VectorXd& basis_out, const RGB& prefiltered);

}  // namespace facelight
