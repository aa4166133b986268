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

namespace facelight {

/// Loss weights; the embedding prior of the original objective has no
/// counterpart with analytic priors and is not represented.
struct LossWeights {
  double rgb = 1.0;
  double white = 5e-3;
  double spec = 8e-3;
  double eikonal = 1e-1;
  double residual = 1e-3;
};

struct LossBreakdown {
  double rgb = 0.0;
  double white = 0.0;
  double spec = 0.0;
  double eikonal = 0.0;
  double residual = 0.0;
  double total = 0.0;
};

struct LossNodes {
  ad::Node rgb, white, spec, eikonal, residual, total;

  LossBreakdown values() const;
};

inline constexpr int kWhiteDirections = 512;

/// rgb: mean |rendered - observed| (3 x n each, calibrated renders).
/// white: mean over 512 Fibonacci directions and channels of |L_c - mean_c L|
///        for the SH light (3 x (l_max+1)^2).
/// spec: mean of the specular radiance (3 x n, non-negative).
/// eikonal: mean | |grad| - 1 | over the columns of `sdf_gradient` (3 x m).
/// residual: mean |displacement| (1 x m).
LossNodes loss_total(const ad::Node& rendered, const ad::Node& observed, const ad::Node& light, int l_max,
                     const ad::Node& specular, const ad::Node& sdf_gradient, const ad::Node& displacement,
                     const LossWeights& weights = {});

/// Individual terms, shared with the sharded training loop.
ad::Node loss_rgb(const ad::Node& rendered, const ad::Node& observed);
ad::Node loss_white(const ad::Node& light, int l_max);
ad::Node loss_eikonal(const ad::Node& sdf_gradient);

}  // namespace facelight
