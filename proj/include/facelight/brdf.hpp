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

#include <string>
#include <vector>

namespace facelight {

/// Closed-form single-channel BRDFs used as ground truth and as analytic
/// integrated-basis sources. Lobes are centered on the mirror direction
/// omega_r = reflect(omega_o, n):
///   lambertian      1 / pi
///   vmf_lobe        kappa / (2 pi (1 - e^{-2 kappa})) exp(kappa (omega_i . omega_r - 1))
///   phong_lobe      (e + 1) / (2 pi) max(omega_i . omega_r, 0)^e
///   low_rank_combo  sum_j w_j b_j
/// Every kind is isotropic and reciprocal.
struct AnalyticBrdf {
  enum class Kind { Lambertian, VmfLobe, PhongLobe, LowRankCombo };

  Kind kind = Kind::Lambertian;
  /// kappa for VmfLobe, exponent for PhongLobe.
  double param = 0.0;
  std::vector<double> weights;
  std::vector<AnalyticBrdf> components;

  static AnalyticBrdf lambertian();
  static AnalyticBrdf vmf_lobe(double kappa);
  static AnalyticBrdf phong_lobe(double exponent);
  static AnalyticBrdf low_rank_combo(std::vector<double> weights, std::vector<AnalyticBrdf> components);

  /// Value for incident omega_i, outgoing omega_o and normal n (all unit).
  double eval(const Vec3& omega_i, const Vec3& omega_o, const Vec3& n) const;
  bool isotropic() const;
  std::string describe() const;

  friend bool operator==(const AnalyticBrdf&, const AnalyticBrdf&) = default;
};

std::string to_string(AnalyticBrdf::Kind kind);
AnalyticBrdf::Kind brdf_kind_from_string(const std::string& s);

}  // namespace facelight
