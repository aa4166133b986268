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

#include "facelight/geometry.hpp"

#include <algorithm>

namespace facelight {

namespace {

double shape_eval(const SpherePrior& s, const Vec3& x, Vec3* grad) {
  const Vec3 d = x - s.center;
  const double r = d.norm();
  if (grad) *grad = r > 0.0 ? Vec3(d / r) : Vec3::Zero();
  return r - s.radius;
}

double shape_eval(const EllipsoidPrior& e, const Vec3& x, Vec3* grad) {
  if (!(e.radii.minCoeff() > 0.0)) throw DomainError("EllipsoidPrior: radii must be positive");
  const Vec3 q = (x - e.center).cwiseQuotient(e.radii);
  const double len = q.norm();
  const double s = e.radii.minCoeff();
  if (grad) *grad = len > 0.0 ? Vec3(s * q.cwiseQuotient(e.radii) / len) : Vec3::Zero();
  return (len - 1.0) * s;
}

double shape_eval(const BlobSetPrior& b, const Vec3& x, Vec3* grad) {
  if (b.centers.empty() || b.centers.size() != b.radii.size()) {
    throw DomainError("BlobSetPrior: centers and radii must be non-empty and aligned");
  }
  Vec3 ga;
  double a = shape_eval(SpherePrior{b.centers[0], b.radii[0]}, x, &ga);
  for (std::size_t i = 1; i < b.centers.size(); ++i) {
    Vec3 gb;
    const double v = shape_eval(SpherePrior{b.centers[i], b.radii[i]}, x, &gb);
    // Polynomial smooth minimum; d/da = h, d/db = 1 - h.
    const double h = std::clamp(0.5 + 0.5 * (v - a) / b.blend, 0.0, 1.0);
    a = h * a + (1.0 - h) * v - b.blend * h * (1.0 - h);
    ga = h * ga + (1.0 - h) * gb;
  }
  if (grad) *grad = ga;
  return a;
}

}  // namespace

double prior_eval(const SdfPrior& prior, const Vec3& x, Vec3* grad) {
  double v = std::visit([&](const auto& s) { return shape_eval(s, x, grad); }, prior.shape);
  if (prior.open_back) {
    const double back = -(x - prior.back_origin).dot(prior.back_axis);
    if (back < v) {
      v = back;
      if (grad) *grad = -prior.back_axis;
    }
  }
  return v;
}

double tracing_scale(const SdfPrior& prior) {
  return std::holds_alternative<BlobSetPrior>(prior.shape) ? 0.9 : 1.0;
}

namespace {

Eigen::VectorXd displacement_input(const NetworkDisplacement& d, const Vec3& x) {
  return positional_encoding(Vec3((x - d.frame.center) / d.frame.radius), d.bands);
}

}  // namespace

double sdf_eval(const SdfField& g, const ParamTape& tape, const Vec3& x) {
  const double p = prior_eval(g.prior, x);
  if (const auto* c = std::get_if<ConstantDisplacement>(&g.displacement)) return p + c->value;
  if (const auto* n = std::get_if<NetworkDisplacement>(&g.displacement)) {
    return p + n->scale * n->mlp.eval(tape, displacement_input(*n, x))(0);
  }
  return p;
}

double sdf_eval_truncated(const SdfField& g, const ParamTape& tape, const Vec3& x) {
  return std::clamp(sdf_eval(g, tape, x), -kSdfTruncation, kSdfTruncation);
}

SdfNodes sdf_eval(ad::Graph& gr, const SdfField& g, const ParamTape& tape, const Eigen::Array3Xd& x,
                  bool with_gradient) {
  const Eigen::Index n = x.cols();
  ad::Array prior(1, n);
  ad::Array prior_grad(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec3 grad;
    prior(0, i) = prior_eval(g.prior, x.col(i).matrix(), with_gradient ? &grad : nullptr);
    if (with_gradient) prior_grad.col(i) = grad.array();
  }
  SdfNodes out;
  const ad::Node p = gr.constant(std::move(prior));
  if (const auto* net = std::get_if<NetworkDisplacement>(&g.displacement)) {
    const ad::Array xn = (x.colwise() - net->frame.center.array()) / net->frame.radius;
    if (with_gradient) {
      Jet in;
      in.value = gr.constant(xn);
      for (int k = 0; k < 3; ++k) {
        ad::Array t = ad::Array::Zero(3, n);
        t.row(k).setConstant(1.0 / net->frame.radius);
        in.tangents[k] = gr.constant(std::move(t));
      }
      const Jet d = net->mlp.forward_jet(gr, tape, positional_encoding(in, net->bands));
      out.displacement = net->scale * d.value;
      out.gradient = gr.constant(std::move(prior_grad)) +
                     net->scale * ad::vstack({d.tangents[0], d.tangents[1], d.tangents[2]});
    } else {
      out.displacement = net->scale * net->mlp.forward(gr, tape, positional_encoding(gr.constant(xn), net->bands));
    }
  } else {
    const double c = std::holds_alternative<ConstantDisplacement>(g.displacement)
                         ? std::get<ConstantDisplacement>(g.displacement).value
                         : 0.0;
    out.displacement = gr.constant(ad::Array::Constant(1, n, c));
    if (with_gradient) out.gradient = gr.constant(std::move(prior_grad));
  }
  out.value = p + out.displacement;
  return out;
}

Vec3 sdf_gradient(const SdfField& g, const ParamTape& tape, const Vec3& x) {
  if (!std::holds_alternative<NetworkDisplacement>(g.displacement)) {
    Vec3 grad;
    prior_eval(g.prior, x, &grad);
    return grad;
  }
  ad::Graph gr(false);
  const SdfNodes n = sdf_eval(gr, g, tape, Eigen::Array3Xd(x.array()), true);
  return n.gradient.value().col(0).matrix();
}

Direction sdf_normal(const SdfField& g, const ParamTape& tape, const Vec3& x) {
  const Vec3 grad = sdf_gradient(g, tape, x);
  if (!(grad.norm() > 1e-8)) throw DomainError("sdf_normal: degenerate gradient");
  return Direction(grad);
}

}  // namespace facelight
