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

#include "facelight/material.hpp"

#include <cmath>

namespace facelight {

void MaterialSample::validate() const {
  if (!((albedo >= 0.0).all() && (albedo <= 1.0).all())) throw DomainError("MaterialSample: albedo outside [0, 1]");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("MaterialSample: rho outside [0, 1]");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("MaterialSample: kappa must be positive");
  if (!coeffs.allFinite()) throw DomainError("MaterialSample: non-finite coefficients");
}

int coeff_count(const MaterialField& field) {
  struct Visitor {
    int operator()(const ConstantField& f) const { return static_cast<int>(f.value.coeffs.size()); }
    int operator()(const LinearRampField& f) const { return static_cast<int>(f.from.coeffs.size()); }
    int operator()(const TwoLobeField&) const { return 2; }
    int operator()(const NetworkField& f) const { return f.k; }
  };
  return std::visit(Visitor{}, field);
}

namespace {

ad::Array tile(const Eigen::ArrayXd& column, Eigen::Index n) { return column.replicate(1, n); }

ad::Node tile(ad::Graph& g, double v, Eigen::Index n) { return g.constant(ad::Array::Constant(1, n, v)); }

MaterialNodes constant_nodes(ad::Graph& g, const MaterialSample& m, Eigen::Index n) {
  return {g.constant(tile(m.albedo, n)), tile(g, m.rho, n), tile(g, 1.0 / m.kappa, n), g.constant(tile(m.coeffs.array(), n))};
}

ad::Node lerp(ad::Graph& g, const ad::Node& s, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  const ad::Node na = g.constant(ad::Array(a));
  const ad::Node nb = g.constant(ad::Array(b));
  return na + s * (nb - na);
}

MaterialNodes eval_nodes(ad::Graph& g, const LinearRampField& f, const ad::Node& x) {
  if (f.from.coeffs.size() != f.to.coeffs.size()) throw DomainError("LinearRampField: coefficient sizes differ");
  if (!(f.hi > f.lo)) throw DomainError("LinearRampField: hi must exceed lo");
  const ad::Node axis = g.constant(ad::Array(f.axis.array()));
  const ad::Node u = (ad::dot3(x, axis) - f.lo) / (f.hi - f.lo);
  const ad::Node s = ad::min(ad::max(u, g.constant(0.0)), g.constant(1.0));
  MaterialNodes out;
  out.albedo = lerp(g, s, f.from.albedo, f.to.albedo);
  out.rho = lerp(g, s, Eigen::ArrayXd::Constant(1, f.from.rho), Eigen::ArrayXd::Constant(1, f.to.rho));
  out.inv_kappa = lerp(g, s, Eigen::ArrayXd::Constant(1, 1.0 / f.from.kappa),
                       Eigen::ArrayXd::Constant(1, 1.0 / f.to.kappa));
  out.coeffs = lerp(g, s, f.from.coeffs.array(), f.to.coeffs.array());
  return out;
}

MaterialNodes eval_nodes(ad::Graph& g, const TwoLobeField& f, const ad::Node& x) {
  const Eigen::Index n = x.cols();
  const ad::Node center = g.constant(ad::Array(f.center.array()));
  const ad::Node axis = g.constant(ad::Array(f.axis.array()));
  const ad::Node s = ad::sigmoid(ad::dot3(x - center, axis) / f.width);
  return {g.constant(tile(f.albedo, n)), tile(g, f.rho, n), tile(g, 1.0 / f.kappa, n), ad::vstack({s, 1.0 - s})};
}

MaterialNodes eval_nodes(ad::Graph& g, const NetworkField& f, const ParamTape& tape, const ad::Node& x) {
  if (f.mlp.inputs() != 3 || f.mlp.outputs() != 5 + f.k) throw DomainError("NetworkField: network shape mismatch");
  const ad::Node center = g.constant(ad::Array(f.frame.center.array()));
  const ad::Node raw = f.mlp.forward(g, tape, (x - center) / f.frame.radius);
  MaterialNodes out;
  out.albedo = ad::sigmoid(ad::rows(raw, 0, 3));
  out.rho = ad::sigmoid(ad::rows(raw, 3, 1));
  out.inv_kappa = ad::softplus(ad::rows(raw, 4, 1));
  out.coeffs = ad::rows(raw, 5, f.k);
  return out;
}

}  // namespace

MaterialNodes eval_material(ad::Graph& g, const MaterialField& field, const ParamTape& tape, const ad::Node& x) {
  if (x.rows() != 3) throw DomainError("eval_material: positions must be 3 x n");
  if (const auto* c = std::get_if<ConstantField>(&field)) return constant_nodes(g, c->value, x.cols());
  if (const auto* r = std::get_if<LinearRampField>(&field)) return eval_nodes(g, *r, x);
  if (const auto* t = std::get_if<TwoLobeField>(&field)) return eval_nodes(g, *t, x);
  return eval_nodes(g, std::get<NetworkField>(field), tape, x);
}

MaterialSample eval_material(const MaterialField& field, const ParamTape& tape, const Vec3& x,
                             const BoundingSphere& omega) {
  if (!x.allFinite()) throw DomainError("eval_material: non-finite position");
  if (!omega.contains(x, 1.1)) throw DomainError("eval_material: position outside the bounding sphere");
  ad::Graph g(false);
  const MaterialNodes n = eval_material(g, field, tape, g.constant(ad::Array(x.array())));
  MaterialSample m;
  m.albedo = n.albedo.value().col(0);
  m.rho = n.rho.scalar();
  m.kappa = 1.0 / n.inv_kappa.scalar();
  m.coeffs = n.coeffs.value().col(0).matrix();
  return m;
}

int basis_count(const IntegratedBasisFn& basis) {
  if (const auto* a = std::get_if<AnalyticBasis>(&basis)) return static_cast<int>(a->tables.size());
  return std::get<NetworkBasis>(basis).mlp.outputs();
}

ad::Node eval_integrated_basis(ad::Graph& g, const IntegratedBasisFn& basis, const ParamTape& tape,
                               const ad::Node& omega_o, const ad::Node& n, const ad::Node& mu) {
  (void)g;
  if (const auto* a = std::get_if<AnalyticBasis>(&basis)) {
    if (a->tables.empty()) throw DomainError("AnalyticBasis: no tables");
    std::vector<ad::Node> rows;
    rows.reserve(a->tables.size());
    for (const auto& t : a->tables) rows.push_back(ad::interpolate(mu, t));
    return ad::vstack(rows);
  }
  const auto& net = std::get<NetworkBasis>(basis);
  if (net.mlp.inputs() != 7) throw DomainError("NetworkBasis: network must take 7 inputs");
  return net.mlp.forward(g, tape, ad::vstack({omega_o, n, mu}));
}

Eigen::VectorXd eval_integrated_basis(const IntegratedBasisFn& basis, const ParamTape& tape, const Direction& omega_o,
                                      const Direction& n) {
  const double mu = omega_o.dot(n);
  if (!(mu > 0.0)) throw BackFacingError("eval_integrated_basis: back-facing query");
  ad::Graph g(false);
  const ad::Node out = eval_integrated_basis(g, basis, tape, g.constant(ad::Array(omega_o.vec().array())),
                                             g.constant(ad::Array(n.vec().array())), g.constant(mu));
  return out.value().col(0).matrix();
}

RGB specular_radiance(const MaterialSample& m, const Eigen::VectorXd& basis_out, const RGB& prefiltered) {
  if (basis_out.size() != m.coeffs.size()) throw DomainError("specular_radiance: coefficient/basis size mismatch");
  const double material = std::max(m.coeffs.dot(basis_out), 0.0);
  return m.rho * material * prefiltered;
}

}  // namespace facelight
