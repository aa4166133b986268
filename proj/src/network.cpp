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

#include "facelight/network.hpp"

#include "facelight/core.hpp"
#include "facelight/rng.hpp"

namespace facelight {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Sine: return "sine";
    case Activation::Softplus: return "softplus";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "sine") return Activation::Sine;
  if (s == "softplus") return Activation::Softplus;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw DomainError("unknown activation '" + s + "'");
}

Mlp::Mlp(ParamTape& tape, const std::string& group, std::vector<int> widths, ActivationSpec hidden)
    : widths_(std::move(widths)), hidden_(hidden) {
  if (widths_.size() < 2) throw DomainError("Mlp: need at least input and output widths");
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    weights_.push_back(tape.allocate(group, static_cast<Eigen::Index>(widths_[i + 1]) * widths_[i]));
    biases_.push_back(tape.allocate(group, widths_[i + 1]));
  }
}

ParamSlice Mlp::slice() const {
  if (weights_.empty()) return {};
  const auto end = biases_.back().offset + biases_.back().size;
  return {weights_.front().offset, end - weights_.front().offset};
}

void Mlp::initialize(ParamTape& tape, std::uint64_t seed) const {
  CounterRng rng(seed);
  const double omega = hidden_.param;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const int in = widths_[l], out = widths_[l + 1];
    double bound;
    if (hidden_.kind == Activation::Sine) {
      bound = l == 0 ? 1.0 / in : std::sqrt(6.0 / in) / omega;
    } else {
      bound = std::sqrt(6.0 / (in + out));
    }
    auto w = tape.view(weights_[l]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.uniform(-bound, bound);
    auto b = tape.view(biases_[l]);
    const double bb = hidden_.kind == Activation::Sine ? 1.0 / std::sqrt(static_cast<double>(in)) : 0.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = bb > 0.0 ? rng.uniform(-bb, bb) : 0.0;
  }
}

void Mlp::set_output_layer(ParamTape& tape, double weight_scale, const Eigen::VectorXd& bias) const {
  if (bias.size() != outputs()) throw DomainError("Mlp::set_output_layer: bias size mismatch");
  tape.view(weights_.back()) *= weight_scale;
  tape.view(biases_.back()) = bias;
}

namespace {

Eigen::VectorXd activate(const Eigen::VectorXd& z, const ActivationSpec& a) {
  switch (a.kind) {
    case Activation::Sine: return (a.param * z.array()).sin().matrix();
    case Activation::Softplus: {
      const Eigen::ArrayXd bz = a.param * z.array();
      return ((bz.max(0.0) + (-bz.abs()).exp().log1p()) / a.param).matrix();
    }
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Identity: return z;
  }
  return z;
}

ad::Node activate(const ad::Node& z, const ActivationSpec& a) {
  switch (a.kind) {
    case Activation::Sine: return ad::sin(a.param * z);
    case Activation::Softplus: return ad::softplus(z, a.param);
    case Activation::Relu: return ad::relu(z);
    case Activation::Tanh: return ad::tanh(z);
    case Activation::Identity: return z;
  }
  return z;
}

/// phi'(z) as a differentiable node.
ad::Node activation_slope(const ad::Node& z, const ActivationSpec& a) {
  switch (a.kind) {
    case Activation::Sine: return a.param * ad::cos(a.param * z);
    case Activation::Softplus: return ad::sigmoid(a.param * z);
    case Activation::Relu: return ad::step(z);
    case Activation::Tanh: {
      const ad::Node t = ad::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Identity: return z.graph().constant(1.0);
  }
  return z.graph().constant(1.0);
}

}  // namespace

Eigen::VectorXd Mlp::eval(const ParamTape& tape, const Eigen::VectorXd& input) const {
  if (input.size() != inputs()) throw DomainError("Mlp::eval: input width mismatch");
  Eigen::VectorXd h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Eigen::Map<const Eigen::MatrixXd> w(tape.values().data() + weights_[l].offset, widths_[l + 1], widths_[l]);
    Eigen::VectorXd z = w * h + tape.view(biases_[l]);
    h = l + 1 < weights_.size() ? activate(z, hidden_) : z;
  }
  return h;
}

ad::Node Mlp::forward(ad::Graph& g, const ParamTape& tape, const ad::Node& input) const {
  if (input.rows() != inputs()) throw DomainError("Mlp::forward: input width mismatch");
  ad::Node h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const ad::Node w = g.parameter(tape, weights_[l], widths_[l + 1], widths_[l]);
    const ad::Node b = g.parameter(tape, biases_[l], widths_[l + 1], 1);
    const ad::Node z = ad::matmul(w, h) + b;
    h = l + 1 < weights_.size() ? activate(z, hidden_) : z;
  }
  return h;
}

Jet Mlp::forward_jet(ad::Graph& g, const ParamTape& tape, const Jet& input) const {
  if (input.value.rows() != inputs()) throw DomainError("Mlp::forward_jet: input width mismatch");
  Jet h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const ad::Node w = g.parameter(tape, weights_[l], widths_[l + 1], widths_[l]);
    const ad::Node b = g.parameter(tape, biases_[l], widths_[l + 1], 1);
    const ad::Node z = ad::matmul(w, h.value) + b;
    Jet next;
    if (l + 1 < weights_.size()) {
      next.value = activate(z, hidden_);
      const ad::Node slope = activation_slope(z, hidden_);
      for (int k = 0; k < 3; ++k) next.tangents[k] = slope * ad::matmul(w, h.tangents[k]);
    } else {
      next.value = z;
      for (int k = 0; k < 3; ++k) next.tangents[k] = ad::matmul(w, h.tangents[k]);
    }
    h = next;
  }
  return h;
}

ad::Node positional_encoding(const ad::Node& x, int bands) {
  std::vector<ad::Node> parts{x};
  for (int k = 0; k < bands; ++k) {
    const double f = std::ldexp(kPi, k);
    parts.push_back(ad::sin(f * x));
    parts.push_back(ad::cos(f * x));
  }
  return ad::vstack(parts);
}

Jet positional_encoding(const Jet& x, int bands) {
  std::vector<ad::Node> values{x.value};
  std::array<std::vector<ad::Node>, 3> tangents;
  for (int t = 0; t < 3; ++t) tangents[t].push_back(x.tangents[t]);
  for (int k = 0; k < bands; ++k) {
    const double f = std::ldexp(kPi, k);
    const ad::Node fx = f * x.value;
    const ad::Node s = ad::sin(fx), c = ad::cos(fx);
    values.push_back(s);
    values.push_back(c);
    for (int t = 0; t < 3; ++t) {
      tangents[t].push_back(f * c * x.tangents[t]);
      tangents[t].push_back(-f * s * x.tangents[t]);
    }
  }
  Jet out;
  out.value = ad::vstack(values);
  for (int t = 0; t < 3; ++t) out.tangents[t] = ad::vstack(tangents[t]);
  return out;
}

Eigen::VectorXd positional_encoding(const Eigen::Vector3d& x, int bands) {
  Eigen::VectorXd out(3 + 6 * bands);
  out.head<3>() = x;
  for (int k = 0; k < bands; ++k) {
    const double f = std::ldexp(kPi, k);
    out.segment<3>(3 + 6 * k) = (f * x.array()).sin().matrix();
    out.segment<3>(6 + 6 * k) = (f * x.array()).cos().matrix();
  }
  return out;
}

}  // namespace facelight
