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

namespace facelight {

class SHLight;

/// Linear RGB image; pixel (x, y) is column y * width + x of a 3 x (w h) array,
/// with y = 0 the top row.
struct Image {
  int width = 0;
  int height = 0;
  Eigen::Array3Xd pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(Eigen::Array3Xd::Zero(3, static_cast<Eigen::Index>(w) * h)) {}

  Eigen::Index index(int x, int y) const { return static_cast<Eigen::Index>(y) * width + x; }
  RGB at(int x, int y) const { return pixels.col(index(x, y)); }
  void set(int x, int y, const RGB& v) { pixels.col(index(x, y)) = v; }
  /// Bilinear lookup at continuous pixel coordinates with edge clamping.
  RGB bilinear(double px, double py) const;
};

/// Portable float map, 3 channels, little-endian, rows stored bottom-up.
void write_pfm(const Image& image, const std::string& path);
Image read_pfm(const std::string& path);

/// 8-bit PNG after clamping to [0, 1] and the sRGB transfer
/// (12.92 x below 0.0031308, else 1.055 x^(1/2.4) - 0.055).
void write_png(const Image& image, const std::string& path);
/// 8-bit or 16-bit RGB(A) PNG decoded back to linear values.
Image read_png(const std::string& path);
double srgb_encode(double linear);
double srgb_decode(double encoded);

/// Reads PFM or PNG by extension.
Image read_image(const std::string& path);

inline constexpr double kPsnrCap = 99.0;

/// -10 log10(MSE) over all channels of [0, 1]-scaled values; kPsnrCap when
/// the images are identical. No clipping is applied.
double psnr(const Image& a, const Image& b);
/// Mean SSIM: 11 x 11 Gaussian window (sigma 1.5) over valid positions,
/// C1 = 0.01^2, C2 = 0.03^2, computed per channel and averaged.
double ssim(const Image& a, const Image& b);

struct MetricsReport {
  double psnr = 0.0;
  double ssim = 0.0;
  /// Mean |SDF_gt| at recovered-surface samples (mm); negative when not computed.
  double geom_err = -1.0;
};

MetricsReport compute_metrics(const Image& a, const Image& b);

/// Projects an equirectangular environment map (row 0 is +z, column u maps
/// to phi = 2 pi (u + 0.5) / width measured from +x toward +y) onto SH by
/// stratified Monte-Carlo over the sphere.
SHLight sh_from_equirect(const Image& env, int l_max, std::size_t samples = 1u << 20, std::uint64_t seed = 1);

}  // namespace facelight
