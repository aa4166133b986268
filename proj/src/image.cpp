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

#include "facelight/image.hpp"

#include "facelight/sh.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace facelight {

RGB Image::bilinear(double px, double py) const {
  const double x = std::clamp(px, 0.0, static_cast<double>(width - 1));
  const double y = std::clamp(py, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1));
}

void write_pfm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "PF\n" << image.width << ' ' << image.height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(image.width) * 3);
  for (int y = image.height - 1; y >= 0; --y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(3 * x + c)] = static_cast<float>(image.pixels(c, image.index(x, y)));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if (magic != "PF" || w <= 0 || h <= 0 || scale == 0.0) throw std::runtime_error("'" + path + "' is not a 3-channel PFM");
  const bool little = scale < 0.0;
  Image img(w, h);
  std::vector<float> row(static_cast<std::size_t>(w) * 3);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated PFM '" + path + "'");
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v = row[static_cast<std::size_t>(3 * x + c)];
        if (little != (std::endian::native == std::endian::little)) {
          std::uint32_t bits;
          std::memcpy(&bits, &v, 4);
          bits = __builtin_bswap32(bits);
          std::memcpy(&v, &bits, 4);
        }
        img.pixels(c, img.index(x, y)) = v;
      }
    }
  }
  return img;
}

double srgb_encode(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double srgb_decode(double v) { return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4); }

void write_png(const Image& image, const std::string& path) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(image.width) * image.height * 3);
  for (Eigen::Index i = 0; i < image.pixels.cols(); ++i) {
    for (int c = 0; c < 3; ++c) {
      buf[static_cast<std::size_t>(3 * i + c)] = static_cast<unsigned char>(std::lround(255.0 * srgb_encode(image.pixels(c, i))));
    }
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw std::runtime_error("failed writing PNG '" + path + "': " + png.message);
  }
}

Image read_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) throw std::runtime_error("cannot read PNG '" + path + "'");
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    throw std::runtime_error("failed decoding PNG '" + path + "': " + png.message);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  for (Eigen::Index i = 0; i < img.pixels.cols(); ++i) {
    for (int c = 0; c < 3; ++c) img.pixels(c, i) = srgb_decode(buf[static_cast<std::size_t>(3 * i + c)] / 255.0);
  }
  return img;
}

Image read_image(const std::string& path) {
  auto ends_with = [&](const std::string& ext) {
    return path.size() >= ext.size() && std::equal(ext.rbegin(), ext.rend(), path.rbegin(),
                                                   [](char a, char b) { return a == std::tolower(b); });
  };
  if (ends_with(".pfm")) return read_pfm(path);
  if (ends_with(".png")) return read_png(path);
  throw std::runtime_error("unsupported image format '" + path + "'");
}

namespace {

void check_same_size(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) throw DomainError("image dimensions differ");
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_size(a, b);
  const double mse = (a.pixels - b.pixels).square().mean();
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double ssim(const Image& a, const Image& b) {
  check_same_size(a, b);
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  if (a.width < kWin || a.height < kWin) throw DomainError("ssim: images smaller than the 11 x 11 window");
  std::array<double, kWin> k{};
  double ksum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    ksum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= ksum;
  const int ow = a.width - kWin + 1, oh = a.height - kWin + 1;
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int j = 0; j < kWin; ++j) {
          for (int i = 0; i < kWin; ++i) {
            const double w = k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(j)];
            const double va = a.pixels(c, a.index(x + i, y + j)), vb = b.pixels(c, b.index(x + i, y + j));
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    }
    total += acc / (static_cast<double>(ow) * oh);
  }
  return total / 3.0;
}

MetricsReport compute_metrics(const Image& a, const Image& b) {
  MetricsReport r;
  r.psnr = psnr(a, b);
  r.ssim = ssim(a, b);
  return r;
}

SHLight sh_from_equirect(const Image& env, int l_max, std::size_t samples, std::uint64_t seed) {
  if (env.width < 2 || env.height < 1) throw DomainError("sh_from_equirect: environment map too small");
  auto lookup = [&env](const Vec3& d) {
    const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
    double phi = std::atan2(d.y(), d.x());
    if (phi < 0.0) phi += 2.0 * kPi;
    return env.bilinear(phi / (2.0 * kPi) * env.width - 0.5, theta / kPi * env.height - 0.5);
  };
  return project_to_sh_mc(lookup, l_max, samples, seed);
}

}  // namespace facelight
