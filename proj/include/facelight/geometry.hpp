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
#include "facelight/core.hpp"
#include "facelight/material.hpp"
#include "facelight/network.hpp"

#include <variant>
#include <vector>

namespace facelight {

struct SpherePrior {
  Vec3 center = Vec3::Zero();
  double radius = 100.0;
};

/// (|(x - c) / r| - 1) min(r): exact on the surface, 1-Lipschitz, not a true
/// distance away from it.
struct EllipsoidPrior {
  Vec3 center = Vec3::Zero();
  Vec3 radii = Vec3::Constant(100.0);
};

/// Spheres folded with a polynomial smooth minimum of radius `blend`.
struct BlobSetPrior {
  std::vector<Vec3> centers;
  std::vector<double> radii;
  double blend = 10.0;
};

using PriorShape = std::variant<SpherePrior, EllipsoidPrior, BlobSetPrior>;

struct SdfPrior {
  PriorShape shape = SpherePrior{};
  /// When set, the half-space (x - origin) . back_axis > 0 is solid:
  /// prior = min(shape, -(x - origin) . back_axis).
  bool open_back = false;
  Vec3 back_axis = -Vec3::UnitZ();
  Vec3 back_origin = Vec3::Zero();
};

struct NoDisplacement {};
struct ConstantDisplacement {
  double value = 0.0;
};
/// Network over the positional encoding of (x - center) / radius; output in mm.
struct NetworkDisplacement {
  Mlp mlp;
  int bands = 6;
  BoundingSphere frame;
  double scale = 1.0;
};

using Displacement = std::variant<NoDisplacement, ConstantDisplacement, NetworkDisplacement>;

struct SdfField {
  SdfPrior prior;
  Displacement displacement = NoDisplacement{};
  BoundingSphere omega;
};

inline constexpr double kSdfTruncation = 50.0;

/// Prior value at x; writes the exact gradient when `grad` is non-null.
double prior_eval(const SdfPrior& prior, const Vec3& x, Vec3* grad = nullptr);
/// Factor applied to traced distances: 1 for exact distance priors, 0.9 for
/// smooth-blended ones.
double tracing_scale(const SdfPrior& prior);

/// prior(x) + displacement(x).
double sdf_eval(const SdfField& g, const ParamTape& tape, const Vec3& x);
/// sdf_eval clamped to [-50, 50] mm.
double sdf_eval_truncated(const SdfField& g, const ParamTape& tape, const Vec3& x);
/// Exact gradient of the full field.
Vec3 sdf_gradient(const SdfField& g, const ParamTape& tape, const Vec3& x);
/// Normalized gradient; throws DomainError when its norm is below 1e-8.
Direction sdf_normal(const SdfField& g, const ParamTape& tape, const Vec3& x);

/// Batched field values; `gradient` (3 x n) is filled only on request and is
/// differentiable with respect to displacement weights.
struct SdfNodes {
  ad::Node value;         // 1 x n
  ad::Node displacement;  // 1 x n
  ad::Node gradient;      // 3 x n
};
SdfNodes sdf_eval(ad::Graph& gr, const SdfField& g, const ParamTape& tape, const Eigen::Array3Xd& x,
                  bool with_gradient);

}  // namespace facelight
