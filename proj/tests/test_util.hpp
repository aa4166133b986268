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

#include "facelight/oracle.hpp"
#include "facelight/render.hpp"
#include "facelight/rng.hpp"

#include <string>

namespace facelight::testing {

inline std::string data_path(const std::string& name) { return std::string(FACELIGHT_TEST_DATA) + "/" + name; }

inline Direction random_direction(CounterRng& rng) {
  return Direction::from_unit(warp::uniform_sphere(rng.uniform(), rng.uniform()));
}

/// Order-l_max light with a positive DC term and decaying random bands.
inline SHLight random_light(CounterRng& rng, int l_max, double dc = 1.5, double amp = 0.5) {
  SHLight light(l_max);
  for (int c = 0; c < 3; ++c) {
    light.coeffs()(c, 0) = dc * rng.uniform(0.8, 1.2);
    for (int i = 1; i < light.count(); ++i) light.coeffs()(c, i) = amp * rng.normal() / (sh_band(i) + 1);
  }
  return light;
}

inline AnalyticBasis cheap_basis(std::vector<AnalyticBrdf> sources) {
  BasisTableOptions opt;
  opt.nodes = 32;
  opt.samples_per_node = 4096;
  return make_analytic_basis(std::move(sources), opt);
}

/// Sphere of radius 100 mm at the origin with a constant material.
inline Scene sphere_scene(const MaterialSample& m, const SHLight& light, std::vector<AnalyticBrdf> bases) {
  Scene s;
  s.geometry.prior.shape = SpherePrior{Vec3::Zero(), 100.0};
  s.geometry.omega = BoundingSphere{Vec3::Zero(), 150.0};
  s.material = ConstantField{m};
  s.basis = cheap_basis(std::move(bases));
  s.light = light;
  s.beta = 0.05;
  return s;
}

inline Camera front_camera(int size, double distance = 330.0) {
  Camera c = Camera::look_at(Vec3(0, 0, distance), Vec3::Zero(), Vec3::UnitY(), 42.0 * kPi / 180.0, size, size);
  c.id = "front";
  return c;
}

}  // namespace facelight::testing
