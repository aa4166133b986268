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
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace facelight {
namespace {

SdfField sphere_field(double radius = 100.0) {
  SdfField g;
  g.prior.shape = SpherePrior{Vec3::Zero(), radius};
  return g;
}

SdfField network_field(ParamTape& tape, std::uint64_t seed) {
  SdfField g;
  g.prior.shape = BlobSetPrior{{Vec3(0, 0, 0), Vec3(0, 40, 50)}, {90.0, 40.0}, 10.0};
  NetworkDisplacement d;
  d.bands = 4;
  d.mlp = Mlp(tape, "displacement", {27, 16, 1}, {Activation::Softplus, 100.0});
  d.mlp.initialize(tape, seed);
  d.frame = g.omega;
  d.scale = 5.0;
  g.displacement = d;
  return g;
}

Vec3 random_point(CounterRng& rng, double radius) {
  return radius * std::cbrt(rng.uniform()) * warp::uniform_sphere(rng.uniform(), rng.uniform());
}

TEST(Sdf, SpherePriorValues) {
  const SdfField g = sphere_field();
  EXPECT_EQ(sdf_eval(g, {}, Vec3::Zero()), -100.0);
  EXPECT_NEAR(sdf_eval(g, {}, Vec3(60, 0, 80)), 0.0, 1e-9);
  EXPECT_LT(sdf_eval(g, {}, Vec3(10, 0, 0)), 0.0);
  EXPECT_GT(sdf_eval(g, {}, Vec3(0, 200, 0)), 0.0);
}

TEST(Sdf, ConstantDisplacementShrinksZeroSet) {
  SdfField g = sphere_field();
  g.displacement = ConstantDisplacement{2.0};
  CounterRng rng(1);
  for (int i = 0; i < 10; ++i) {
    const Vec3 d = warp::uniform_sphere(rng.uniform(), rng.uniform());
    double lo = 0.0, hi = 150.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (sdf_eval(g, {}, mid * d) < 0.0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(0.5 * (lo + hi), 98.0, 1e-9);
  }
}

TEST(Sdf, TruncationClamps) {
  const SdfField g = sphere_field();
  EXPECT_EQ(sdf_eval_truncated(g, {}, Vec3::Zero()), -kSdfTruncation);
  EXPECT_EQ(sdf_eval_truncated(g, {}, Vec3(400, 0, 0)), kSdfTruncation);
  EXPECT_EQ(sdf_eval_truncated(g, {}, Vec3(110, 0, 0)), 10.0);
}

TEST(Sdf, RadialNormal) {
  const Direction n = sdf_normal(sphere_field(), {}, Vec3(150, 0, 0));
  EXPECT_NEAR(n.x(), 1.0, 1e-15);
  EXPECT_NEAR(n.y(), 0.0, 1e-15);
  EXPECT_NEAR(n.z(), 0.0, 1e-15);
}

TEST(Sdf, SphereIsEikonal) {
  CounterRng rng(2);
  SdfField open = sphere_field();
  open.prior.open_back = true;
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = random_point(rng, 150.0);
    EXPECT_NEAR(sdf_gradient(sphere_field(), {}, x).norm(), 1.0, 1e-12);
    EXPECT_NEAR(sdf_gradient(open, {}, x).norm(), 1.0, 1e-12);
  }
}

TEST(Sdf, TracingScale) {
  EXPECT_EQ(tracing_scale(sphere_field().prior), 1.0);
  SdfPrior blobs;
  blobs.shape = BlobSetPrior{{Vec3::Zero()}, {50.0}, 10.0};
  EXPECT_EQ(tracing_scale(blobs), 0.9);
}

TEST(Sdf, OpenBackIsSolidBehindTheOrigin) {
  SdfField g = sphere_field();
  g.prior.open_back = true;
  EXPECT_LT(sdf_eval(g, {}, Vec3(0, 0, -130)), 0.0);
  EXPECT_GT(sdf_eval(g, {}, Vec3(0, 0, 130)), 0.0);
}

// Central differences with h = 1e-3 mm, 1e-4 relative.
void expect_gradient_matches_fd(const SdfField& g, const ParamTape& tape, std::uint64_t seed) {
  CounterRng rng(seed);
  const double h = 1e-3;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_point(rng, 140.0);
    const Vec3 grad = sdf_gradient(g, tape, x);
    Vec3 fd;
    for (int a = 0; a < 3; ++a) {
      Vec3 p = x, m = x;
      p(a) += h;
      m(a) -= h;
      fd(a) = (sdf_eval(g, tape, p) - sdf_eval(g, tape, m)) / (2 * h);
    }
    EXPECT_LE((grad - fd).norm(), 1e-4 * std::max(fd.norm(), 1.0)) << x.transpose();
  }
}

TEST(Sdf, GradientMatchesFiniteDifferences) {
  SdfField ellipsoid;
  ellipsoid.prior.shape = EllipsoidPrior{Vec3(5, 0, 0), Vec3(90, 110, 80)};
  expect_gradient_matches_fd(ellipsoid, {}, 3);
  ParamTape tape;
  const SdfField net = network_field(tape, 7);
  expect_gradient_matches_fd(net, tape, 4);
}

TEST(Sdf, BatchedMatchesPointEvaluation) {
  ParamTape tape;
  const SdfField g = network_field(tape, 8);
  CounterRng rng(5);
  Eigen::Array3Xd x(3, 16);
  for (int i = 0; i < 16; ++i) x.col(i) = random_point(rng, 140.0).array();
  ad::Graph gr(false);
  const SdfNodes nodes = sdf_eval(gr, g, tape, x, true);
  for (int i = 0; i < 16; ++i) {
    const Vec3 p = x.col(i).matrix();
    EXPECT_NEAR(nodes.value.value()(0, i), sdf_eval(g, tape, p), 1e-10);
    const Vec3 grad = sdf_gradient(g, tape, p);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(nodes.gradient.value()(a, i), grad(a), 1e-10);
  }
}

TEST(Sdf, ZeroDisplacementReproducesPrior) {
  SdfField g = sphere_field();
  g.displacement = ConstantDisplacement{0.0};
  CounterRng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_point(rng, 150.0);
    EXPECT_EQ(sdf_eval(g, {}, x), prior_eval(g.prior, x));
  }
}

}  // namespace
}  // namespace facelight
