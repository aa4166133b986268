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

#include "facelight/brdf.hpp"
#include "facelight/material.hpp"
#include "facelight/render.hpp"
#include "facelight/sh.hpp"

#include <cstdint>
#include <vector>

namespace facelight {

/// Monte-Carlo mean with its standard error (one entry per channel, or one
/// for scalar integrands).
struct McEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;

  double value() const { return mean(0); }
  RGB rgb() const { return mean.head<3>().array(); }
};

enum class HemisphereSampling {
  Uniform,
  Cosine,
  /// Mixture of the cosine density and each lobe's own density (one-sample
  /// balance heuristic).
  Lobe,
};

struct McOptions {
  HemisphereSampling sampling = HemisphereSampling::Cosine;
  bool stratified = true;
  /// Workers; results do not depend on this.
  int threads = 1;
};

/// Samples per independent shard; shard s draws from CounterRng::derive(seed, s).
inline constexpr std::size_t kShardSize = std::size_t{1} << 16;

/// Estimates integral L(omega_i) f(omega_i, omega_o) (omega_i . n)^+ d omega_i
/// for a single-channel BRDF under an RGB light (unclamped SH reconstruction).
McEstimate mc_render_eq(const AnalyticBrdf& f, const Direction& n, const Direction& omega_o, const SHLight& light,
                        std::size_t n_samples, std::uint64_t seed, const McOptions& options = {});

/// Same for the material BRDF a / pi + rho sum_j c_j b_j.
McEstimate mc_render_eq(const MaterialSample& m, const std::vector<AnalyticBrdf>& bases, const Direction& n,
                        const Direction& omega_o, const SHLight& light, std::size_t n_samples, std::uint64_t seed,
                        const McOptions& options = {});

/// Specular part rho sum_j c_j b_j of the above.
McEstimate mc_specular(const MaterialSample& m, const std::vector<AnalyticBrdf>& bases, const Direction& n,
                       const Direction& omega_o, const SHLight& light, std::size_t n_samples, std::uint64_t seed,
                       const McOptions& options = {});

/// E[Y_lm(omega)] for omega drawn from the vMF lobe.
McEstimate mc_vmf_expectation(int l, int m, const VmfLobe& lobe, std::size_t n_samples, std::uint64_t seed,
                              bool stratified = true);

/// B(mu) = integral b(omega_i, omega_o) (omega_i . n)^+ d omega_i tabulated
/// at `nodes` uniform values of mu = omega_o . n in [0, 1].
MonotoneCubic integrate_basis_table(const AnalyticBrdf& b, const BasisTableOptions& options = {});

/// Direct estimate of the same integral at one mu.
McEstimate integrate_basis_mc(const AnalyticBrdf& b, double mu, std::size_t n_samples, std::uint64_t seed);

AnalyticBasis make_analytic_basis(std::vector<AnalyticBrdf> sources, const BasisTableOptions& options = {});

/// Funk-Hecke coefficient A_l = (e + 1) integral_0^1 t^e P_l(t) dt of the
/// normalized Phong lobe.
double phong_attenuation(int l, double exponent);

/// sum_lm A_l c_lm Y_lm(omega_r), clamped at zero per channel.
RGB phong_specular(const Direction& n, const Direction& omega_o, double exponent, const SHLight& light);

struct OracleRenderOptions {
  std::size_t samples = 1024;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Ground-truth image: each pixel-center ray is traced to the surface and the
/// rendering equation is estimated there with the scene's analytic basis
/// BRDFs (lobe sampling). Misses are black. The basis must be analytic.
/// Pixel streams derive from (seed, camera id, pixel index), so the image
/// does not depend on the thread count.
Image oracle_render(const Scene& scene, const Camera& camera, const OracleRenderOptions& options = {});

}  // namespace facelight
