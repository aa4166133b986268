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

#include "facelight/brdf.hpp"

#include <sstream>

namespace facelight {

AnalyticBrdf AnalyticBrdf::lambertian() { return {}; }

AnalyticBrdf AnalyticBrdf::vmf_lobe(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("vmf_lobe: kappa must be positive");
  AnalyticBrdf b;
  b.kind = Kind::VmfLobe;
  b.param = kappa;
  return b;
}

AnalyticBrdf AnalyticBrdf::phong_lobe(double exponent) {
  if (!(exponent > 0.0)) throw DomainError("phong_lobe: exponent must be positive");
  AnalyticBrdf b;
  b.kind = Kind::PhongLobe;
  b.param = exponent;
  return b;
}

AnalyticBrdf AnalyticBrdf::low_rank_combo(std::vector<double> weights, std::vector<AnalyticBrdf> components) {
  if (weights.size() != components.size() || components.empty()) {
    throw DomainError("low_rank_combo: weights and components must be non-empty and aligned");
  }
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("low_rank_combo: weights must be non-negative");
  }
  AnalyticBrdf b;
  b.kind = Kind::LowRankCombo;
  b.weights = std::move(weights);
  b.components = std::move(components);
  return b;
}

double AnalyticBrdf::eval(const Vec3& omega_i, const Vec3& omega_o, const Vec3& n) const {
  switch (kind) {
    case Kind::Lambertian: return 1.0 / kPi;
    case Kind::VmfLobe: {
      const Vec3 r = 2.0 * omega_o.dot(n) * n - omega_o;
      const double k = param;
      return k / (2.0 * kPi * -std::expm1(-2.0 * k)) * std::exp(k * (omega_i.dot(r) - 1.0));
    }
    case Kind::PhongLobe: {
      const Vec3 r = 2.0 * omega_o.dot(n) * n - omega_o;
      const double c = omega_i.dot(r);
      return c > 0.0 ? (param + 1.0) / (2.0 * kPi) * std::pow(c, param) : 0.0;
    }
    case Kind::LowRankCombo: {
      double sum = 0.0;
      for (std::size_t j = 0; j < components.size(); ++j) sum += weights[j] * components[j].eval(omega_i, omega_o, n);
      return sum;
    }
  }
  return 0.0;
}

bool AnalyticBrdf::isotropic() const {
  if (kind != Kind::LowRankCombo) return true;
  for (const auto& c : components) {
    if (!c.isotropic()) return false;
  }
  return true;
}

std::string to_string(AnalyticBrdf::Kind kind) {
  switch (kind) {
    case AnalyticBrdf::Kind::Lambertian: return "lambertian";
    case AnalyticBrdf::Kind::VmfLobe: return "vmf_lobe";
    case AnalyticBrdf::Kind::PhongLobe: return "phong_lobe";
    case AnalyticBrdf::Kind::LowRankCombo: return "low_rank_combo";
  }
  return "lambertian";
}

AnalyticBrdf::Kind brdf_kind_from_string(const std::string& s) {
  if (s == "lambertian") return AnalyticBrdf::Kind::Lambertian;
  if (s == "vmf_lobe") return AnalyticBrdf::Kind::VmfLobe;
  if (s == "phong_lobe") return AnalyticBrdf::Kind::PhongLobe;
  if (s == "low_rank_combo") return AnalyticBrdf::Kind::LowRankCombo;
  throw DomainError("unknown BRDF kind '" + s + "'");
}

std::string AnalyticBrdf::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == Kind::VmfLobe || kind == Kind::PhongLobe) os << '(' << param << ')';
  if (kind == Kind::LowRankCombo) {
    os << '[';
    for (std::size_t j = 0; j < components.size(); ++j) {
      os << (j ? ", " : "") << weights[j] << '*' << components[j].describe();
    }
    os << ']';
  }
  return os.str();
}

}  // namespace facelight
