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

#include "facelight/calibration.hpp"

#include "facelight/rng.hpp"

#include <Eigen/Eigenvalues>

namespace facelight {

RGB calibrate_apply(const CalibrationMap& map, const RGB& rgb) { return (map.matrix * rgb.matrix()).array(); }

Image calibrate_apply(const CalibrationMap& map, const Image& image) {
  Image out = image;
  out.pixels = (map.matrix * image.pixels.matrix()).array();
  return out;
}

CalibrationMap calibrate_solve(const Eigen::Array3Xd& rendered, const Eigen::Array3Xd& observed,
                               CalibrationDiagnostics* diagnostics) {
  if (rendered.cols() != observed.cols()) throw DomainError("calibrate_solve: pixel counts differ");
  if (!rendered.allFinite() || !observed.allFinite()) throw DomainError("calibrate_solve: non-finite pixels");
  const Eigen::Matrix3Xd r = rendered.matrix();
  const Eigen::Matrix3Xd o = observed.matrix();
  const Mat3 gram = r * r.transpose();
  const Mat3 cross = o * r.transpose();
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  const double conditioning = hi > 0.0 ? lo / hi : 0.0;
  const bool ridge = !(conditioning > 1e-12);
  CalibrationMap map;
  if (ridge) {
    map.matrix = (gram + kCalibrationRidge * Mat3::Identity()).ldlt().solve(cross.transpose()).transpose();
  } else {
    map.matrix = gram.ldlt().solve(cross.transpose()).transpose();
  }
  if (diagnostics) {
    diagnostics->ridge_fallback = ridge;
    diagnostics->conditioning = conditioning;
    diagnostics->residual = (map.matrix * r - o).squaredNorm();
  }
  return map;
}

CalibrationMap calibrate_solve(const Image& rendered, const Image& observed, CalibrationDiagnostics* diagnostics) {
  if (rendered.width != observed.width || rendered.height != observed.height) {
    throw DomainError("calibrate_solve: image dimensions differ");
  }
  return calibrate_solve(rendered.pixels, observed.pixels, diagnostics);
}

CalibrationNetwork::CalibrationNetwork(ParamTape& tape, int images, std::uint64_t seed, const std::string& group)
    : images_(images) {
  if (images <= 0) throw DomainError("CalibrationNetwork: need at least one image");
  embeddings_ = tape.allocate(group, static_cast<Eigen::Index>(kEmbedding) * images);
  mlp_ = Mlp(tape, group, {kEmbedding, kHidden, kHidden, 9}, {Activation::Tanh, 1.0});
  mlp_.initialize(tape, CounterRng::derive(seed, 1));
  Eigen::VectorXd identity(9);
  identity << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  mlp_.set_output_layer(tape, 0.0, identity);
  CounterRng rng(CounterRng::derive(seed, 2));
  auto e = tape.view(embeddings_);
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = rng.uniform(-0.01, 0.01);
}

ad::Node CalibrationNetwork::apply(ad::Graph& g, const ParamTape& tape, const ad::Node& rgb,
                                   const std::vector<Eigen::Index>& index) const {
  if (rgb.rows() != 3 || rgb.cols() != static_cast<Eigen::Index>(index.size())) {
    throw DomainError("CalibrationNetwork::apply: batch and index misaligned");
  }
  const ad::Node table = g.parameter(tape, embeddings_, kEmbedding, images_);
  const ad::Node m = mlp_.forward(g, tape, ad::gather_cols(table, index));
  std::vector<ad::Node> rows;
  for (int c = 0; c < 3; ++c) {
    rows.push_back(ad::rows(m, 3 * c, 1) * ad::rows(rgb, 0, 1) + ad::rows(m, 3 * c + 1, 1) * ad::rows(rgb, 1, 1) +
                   ad::rows(m, 3 * c + 2, 1) * ad::rows(rgb, 2, 1));
  }
  return ad::vstack(rows);
}

CalibrationMap CalibrationNetwork::map(const ParamTape& tape, int image) const {
  if (image < 0 || image >= images_) throw DomainError("CalibrationNetwork::map: image index out of range");
  const Eigen::VectorXd e = tape.values().segment(embeddings_.offset + static_cast<Eigen::Index>(image) * kEmbedding, kEmbedding);
  const Eigen::VectorXd m = mlp_.eval(tape, e);
  CalibrationMap map;
  map.matrix << m(0), m(1), m(2), m(3), m(4), m(5), m(6), m(7), m(8);
  return map;
}

}  // namespace facelight
