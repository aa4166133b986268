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
#include "facelight/param_tape.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace facelight {

enum class Activation { Sine, Softplus, Relu, Tanh, Identity };

struct ActivationSpec {
  Activation kind = Activation::Softplus;
  /// omega_0 for Sine, beta for Softplus; unused otherwise.
  double param = 1.0;
};

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Value of a field plus its directional derivatives along three input
/// tangents (typically the x, y, z axes).
struct Jet {
  ad::Node value;
  std::array<ad::Node, 3> tangents;
};

/// Fully connected network whose weights live on a ParamTape. Hidden layers
/// apply `hidden`; the output layer is linear. Layer weights are stored
/// column-major (out x in) followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamTape& tape, const std::string& group, std::vector<int> widths, ActivationSpec hidden);

  /// SIREN initialization for Sine networks, Xavier-uniform otherwise; biases
  /// zero except for Sine, which uses U(-1/sqrt(in), 1/sqrt(in)).
  void initialize(ParamTape& tape, std::uint64_t seed) const;
  /// Scales the output layer weights and sets its bias.
  void set_output_layer(ParamTape& tape, double weight_scale, const Eigen::VectorXd& bias) const;

  const std::vector<int>& widths() const { return widths_; }
  int inputs() const { return widths_.front(); }
  int outputs() const { return widths_.back(); }
  const ActivationSpec& hidden() const { return hidden_; }
  std::size_t layers() const { return weights_.size(); }
  ParamSlice weight_slice(std::size_t layer) const { return weights_[layer]; }
  ParamSlice bias_slice(std::size_t layer) const { return biases_[layer]; }
  /// Whole contiguous parameter range.
  ParamSlice slice() const;

  Eigen::VectorXd eval(const ParamTape& tape, const Eigen::VectorXd& input) const;
  ad::Node forward(ad::Graph& g, const ParamTape& tape, const ad::Node& input) const;
  Jet forward_jet(ad::Graph& g, const ParamTape& tape, const Jet& input) const;

 private:
  std::vector<int> widths_;
  ActivationSpec hidden_;
  std::vector<ParamSlice> weights_;
  std::vector<ParamSlice> biases_;
};

/// gamma(x) = (x, sin(2^0 pi x), cos(2^0 pi x), ..., sin(2^(L-1) pi x), cos(2^(L-1) pi x)),
/// 3 + 6L rows for a 3 x n input.
ad::Node positional_encoding(const ad::Node& x, int bands);
Jet positional_encoding(const Jet& x, int bands);
Eigen::VectorXd positional_encoding(const Eigen::Vector3d& x, int bands);

}  // namespace facelight
