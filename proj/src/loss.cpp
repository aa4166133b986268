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

#include "facelight/loss.hpp"

#include "facelight/core.hpp"
#include "facelight/numerics.hpp"
#include "facelight/sh.hpp"

namespace facelight {

LossBreakdown LossNodes::values() const {
  return {rgb.scalar(), white.scalar(), spec.scalar(), eikonal.scalar(), residual.scalar(), total.scalar()};
}

ad::Node loss_rgb(const ad::Node& rendered, const ad::Node& observed) {
  if (rendered.rows() != observed.rows() || rendered.cols() != observed.cols()) {
    throw DomainError("loss_rgb: rendered and observed batches differ in shape");
  }
  return ad::mean(ad::abs(rendered - observed));
}

ad::Node loss_white(const ad::Node& light, int l_max) {
  if (light.rows() != 3 || light.cols() != sh_count(l_max)) throw DomainError("loss_white: light shape mismatch");
  static const Eigen::Matrix3Xd dirs = fibonacci_sphere(kWhiteDirections);
  ad::Array y(sh_count(l_max), kWhiteDirections);
  for (int j = 0; j < kWhiteDirections; ++j) sh_basis_into(dirs(0, j), dirs(1, j), dirs(2, j), l_max, &y(0, j));
  const ad::Node radiance = ad::matmul(light, light.graph().constant(std::move(y)));
  const ad::Node gray = ad::sum_rows(radiance) * (1.0 / 3.0);
  return ad::mean(ad::abs(radiance - gray));
}

ad::Node loss_eikonal(const ad::Node& sdf_gradient) {
  if (sdf_gradient.rows() != 3) throw DomainError("loss_eikonal: gradient must be 3 x m");
  return ad::mean(ad::abs(ad::norm(sdf_gradient) - 1.0));
}

LossNodes loss_total(const ad::Node& rendered, const ad::Node& observed, const ad::Node& light, int l_max,
                     const ad::Node& specular, const ad::Node& sdf_gradient, const ad::Node& displacement,
                     const LossWeights& w) {
  if (specular.rows() != 3 || specular.cols() != rendered.cols()) throw DomainError("loss_total: specular batch misaligned");
  if (displacement.rows() != 1 || displacement.cols() != sdf_gradient.cols()) {
    throw DomainError("loss_total: displacement samples misaligned with gradient samples");
  }
  LossNodes n;
  n.rgb = loss_rgb(rendered, observed);
  n.white = loss_white(light, l_max);
  n.spec = ad::mean(specular);
  n.eikonal = loss_eikonal(sdf_gradient);
  n.residual = ad::mean(ad::abs(displacement));
  n.total = w.rgb * n.rgb + w.white * n.white + w.spec * n.spec + w.eikonal * n.eikonal + w.residual * n.residual;
  return n;
}

}  // namespace facelight
