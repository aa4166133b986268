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
#include "facelight/geometry.hpp"
#include "facelight/image.hpp"
#include "facelight/material.hpp"
#include "facelight/sh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace facelight {

struct Ray {
  Vec3 origin = Vec3::Zero();
  Direction dir;

  Vec3 at(double t) const { return origin + t * dir.vec(); }
};

/// Pinhole camera in the OpenCV convention (camera looks down +z, image y
/// points down). `rotation` and `position` give the world-from-camera pose.
struct Camera {
  std::string id;
  std::string split = "train";
  int width = 128;
  int height = 128;
  double fx = 128.0;
  double fy = 128.0;
  double cx = 64.0;
  double cy = 64.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();
  /// Observed image for fitting, relative to the scene file.
  std::string image;

  void validate() const;
  /// Ray through pixel coordinates (px, py); pixel centers sit at +0.5.
  Ray generate_ray(double px, double py) const;
  /// Camera at `eye` looking at `target` with vertical field of view `fov_y` (radians).
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y, int width, int height);
};

struct TraceSettings {
  double hit_threshold = 0.05;
  double step_factor = 1.2;
  int max_iterations = 256;
};

struct TraceResult {
  enum class Status { Hit, MissedOmega, ExitedOmega, EnteredNegative, IterationCap };

  Status status = Status::MissedOmega;
  double t0 = 0.0;
  double sdf = 0.0;
  int iterations = 0;
  double t_enter = 0.0;
  double t_exit = 0.0;

  bool hit() const { return status == Status::Hit; }
  bool in_omega() const { return status != Status::MissedOmega; }
};

std::string to_string(TraceResult::Status s);

/// Parameter interval [t_enter, t_exit] of the ray inside the sphere, t >= 0.
bool intersect_sphere(const Ray& ray, const BoundingSphere& s, double* t_enter, double* t_exit);

/// Steps t by step_factor x (truncated SDF) x tracing_scale from the entry
/// into Omega. An overshoot below -threshold is refined by false position
/// inside the last bracket. `trajectory`, if given, receives every accepted
/// position parameter (non-decreasing).
TraceResult sphere_trace(const SdfField& g, const ParamTape& tape, const Ray& ray, const TraceSettings& settings = {},
                         std::vector<double>* trajectory = nullptr);

/// `count` uniform parameters on [t0 - half_width, t0 + half_width], endpoints included.
std::vector<double> sample_window(double t0, int count = 32, double half_width = 0.5);

/// beta^-1 Psi_beta(-sdf) with Psi_beta the zero-mean Laplace CDF of scale beta.
double laplace_density(double sdf, double beta);

struct RenderSettings {
  TraceSettings trace;
  int window_samples = 32;
  double window_half_width = 0.5;
  int unhit_samples = 8;
  int tile_size = 16;
};

/// Samples along one ray with densities and compositing weights
/// w_i = T_i (1 - exp(-sigma_i dt_i)), T_i = exp(-sum_{j<i} sigma_j dt_j).
struct RaySampleSet {
  bool hit = false;
  double t0 = 0.0;
  std::vector<double> t;
  std::vector<double> dt;
  Eigen::ArrayXd sigma;
  Eigen::ArrayXd weights;
};

/// Compositing weights for densities sampled with spacings dt.
Eigen::ArrayXd volume_weights(const Eigen::ArrayXd& sigma, const Eigen::ArrayXd& dt);
/// Builds the sample set of a traced ray and fills sigma and weights.
RaySampleSet make_sample_set(const SdfField& g, const ParamTape& tape, const Ray& ray, const TraceResult& trace,
                             double beta, const RenderSettings& settings = {});
/// sum_i w_i L_i for radiances given as 3 x n.
RGB volume_integrate(const RaySampleSet& samples, const Eigen::Array3Xd& radiances);

/// Everything except the light and beta, which are graph inputs.
struct ShadingModel {
  const SdfField* geometry;
  const MaterialField* material;
  const IntegratedBasisFn* basis;
  const ParamTape* tape;
};

struct ShadeNodes {
  ad::Node diffuse;   // 3 x n
  ad::Node specular;  // 3 x n
  ad::Node radiance;  // 3 x n
};

/// (a / pi) max(sum Lambda_l c_lm Y_lm(n), 0) + rho max(c . B, 0) max(sum e^{-l(l+1)/2kappa} c_lm Y_lm(omega_r), 0)
/// at the columns of x with unit normals n (3 x n). Columns with omega_o . n <= 0
/// get a zero specular term. `light` is 3 x (l_max+1)^2.
ShadeNodes shade_points(ad::Graph& g, const ShadingModel& model, const Eigen::Array3Xd& x,
                        const Eigen::Array3Xd& omega_o, const ad::Node& normals, const ad::Node& light, int l_max);

/// Single-point shading at x with the field normal.
RGB shade(const Vec3& x, const Direction& omega_o, const SdfField& g, const MaterialField& field,
          const IntegratedBasisFn& basis, const SHLight& light, const ParamTape& tape);
/// Same, with diffuse and specular reported separately.
RGB shade(const Vec3& x, const Direction& omega_o, const SdfField& g, const MaterialField& field,
          const IntegratedBasisFn& basis, const SHLight& light, const ParamTape& tape, RGB* diffuse, RGB* specular);

/// Traced rays flattened into one sample array.
struct RayBatch {
  std::vector<TraceResult> traces;
  std::vector<Eigen::Index> offsets;  // segment s covers samples [offsets[s], offsets[s+1])
  Eigen::Array3Xd positions;
  Eigen::Array3Xd omega_o;
  Eigen::ArrayXd dt;
};

RayBatch plan_rays(const SdfField& g, const ParamTape& tape, const std::vector<Ray>& rays,
                   const RenderSettings& settings);

struct RayRender {
  ad::Node rgb;         // 3 x rays
  ad::Node specular;    // 3 x rays, volume-integrated specular term
  ad::Node weight_sum;  // 1 x rays
  ad::Node sdf_gradient;  // 3 x samples
};

RayRender render_rays(ad::Graph& g, const ShadingModel& model, const RayBatch& batch, const ad::Node& light,
                      int l_max, const ad::Node& beta);

struct Scene {
  int version = 1;
  SdfField geometry;
  MaterialField material = ConstantField{};
  IntegratedBasisFn basis = AnalyticBasis{};
  SHLight light{2};
  double beta = 0.1;
  ParamTape params;
  std::vector<Camera> cameras;
  RenderSettings settings;
  std::uint64_t seed = 0;

  ShadingModel model() const { return {&geometry, &material, &basis, &params}; }
  const Camera& camera(const std::string& id) const;
};

struct RenderStats {
  double trace_seconds = 0.0;
  double shade_seconds = 0.0;
  double integrate_seconds = 0.0;
  std::size_t rays = 0;
  std::size_t hits = 0;
  /// Pixel indices (y * width + x) whose trace hit the iteration cap.
  std::vector<std::size_t> cap_pixels;
};

struct RenderOptions {
  int threads = 1;
  bool deterministic = true;
};

/// Linear RGB image of the scene; unhit rays integrate their in-Omega
/// samples and rays missing Omega are black.
Image render_image(const Scene& scene, const Camera& camera, const RenderOptions& options = {},
                   RenderStats* stats = nullptr);

}  // namespace facelight
