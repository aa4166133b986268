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
#include "facelight/image.hpp"
#include "facelight/network.hpp"

#include <string>

namespace facelight {

/// Per-image linear color map applied as A rgb.
struct CalibrationMap {
  Mat3 matrix = Mat3::Identity();

  static CalibrationMap identity() { return {}; }
  bool finite() const { return matrix.allFinite(); }
};

RGB calibrate_apply(const CalibrationMap& map, const RGB& rgb);
Image calibrate_apply(const CalibrationMap& map, const Image& image);

struct CalibrationDiagnostics {
  bool ridge_fallback = false;
  /// Smallest over largest eigenvalue of the rendered Gram matrix.
  double conditioning = 0.0;
  double residual = 0.0;
};

inline constexpr double kCalibrationRidge = 1e-8;

/// Least-squares A minimizing sum |A r - o|^2 over paired columns (3 x n).
/// Near-singular Gram matrices fall back to ridge regularization.
CalibrationMap calibrate_solve(const Eigen::Array3Xd& rendered, const Eigen::Array3Xd& observed,
                               CalibrationDiagnostics* diagnostics = nullptr);
CalibrationMap calibrate_solve(const Image& rendered, const Image& observed,
                               CalibrationDiagnostics* diagnostics = nullptr);

/// Training-time calibration: a learnable 8-d embedding per image feeds a
/// small MLP (8 -> 32 -> 32 -> 9) whose output is the row-major 3 x 3 map,
/// initialized to the identity.
class CalibrationNetwork {
 public:
  static constexpr int kEmbedding = 8;
  static constexpr int kHidden = 32;

  CalibrationNetwork() = default;
  CalibrationNetwork(ParamTape& tape, int images, std::uint64_t seed, const std::string& group = "calibration");

  int images() const { return images_; }
  /// Calibrated colors for a 3 x n batch whose column j came from image index[j].
  ad::Node apply(ad::Graph& g, const ParamTape& tape, const ad::Node& rgb, const std::vector<Eigen::Index>& index) const;
  /// Current map of one image.
  CalibrationMap map(const ParamTape& tape, int image) const;

 private:
  int images_ = 0;
  ParamSlice embeddings_;
  Mlp mlp_;
};

}  // namespace facelight
