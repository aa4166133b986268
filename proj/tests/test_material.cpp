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


#include "facelight/material.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace facelight {
namespace {

NetworkField make_network(ParamTape& tape, int k, std::uint64_t seed) {
  NetworkField f;
  f.k = k;
  f.mlp = Mlp(tape, "material", {3, 16, 16, 5 + k}, {Activation::Sine, 30.0});
  f.mlp.initialize(tape, seed);
  f.frame = BoundingSphere{Vec3::Zero(), 150.0};
  return f;
}

TEST(Material, ConstantFieldReturnsItsValue) {
  MaterialSample m;
  m.albedo = RGB::Constant(0.5);
  m.rho = 0.06;
  m.kappa = 64.0;
  m.coeffs = Eigen::Vector3d(1, 0, 0);
  const MaterialSample out = eval_material(ConstantField{m}, ParamTape{}, Vec3(10, -20, 30), BoundingSphere{});
  EXPECT_TRUE((out.albedo == 0.5).all());
  EXPECT_EQ(out.rho, 0.06);
  EXPECT_EQ(out.kappa, 64.0);
  EXPECT_EQ(out.coeffs, m.coeffs);
}

TEST(Material, RejectsPointsOutsideOmega) {
  EXPECT_THROW(eval_material(ConstantField{}, ParamTape{}, Vec3(200, 0, 0), BoundingSphere{}), DomainError);
  EXPECT_NO_THROW(eval_material(ConstantField{}, ParamTape{}, Vec3(160, 0, 0), BoundingSphere{}));
}

TEST(Material, ValidateRejectsOutOfRange) {
  MaterialSample m;
  m.coeffs = Eigen::VectorXd::Zero(2);
  EXPECT_NO_THROW(m.validate());
  m.rho = 1.5;
  EXPECT_THROW(m.validate(), DomainError);
  m.rho = 0.1;
  m.kappa = 0.0;
  EXPECT_THROW(m.validate(), DomainError);
  m.kappa = 4.0;
  m.albedo(1) = -0.1;
  EXPECT_THROW(m.validate(), DomainError);
}

TEST(Material, NetworkOutputsStayInRange) {
  CounterRng rng(1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParamTape tape;
    const NetworkField f = make_network(tape, 3, seed);
    // Random weights well beyond the initialization scale.
    for (Eigen::Index i = 0; i < tape.size(); ++i) tape.values()(i) += 2.0 * rng.normal();
    for (int i = 0; i < 1000; ++i) {
      const Vec3 x = 140.0 * warp::uniform_sphere(rng.uniform(), rng.uniform()) * std::cbrt(rng.uniform());
      const MaterialSample m = eval_material(f, tape, x, f.frame);
      EXPECT_TRUE((m.albedo >= 0.0).all() && (m.albedo <= 1.0).all());
      EXPECT_GE(m.rho, 0.0);
      EXPECT_LE(m.rho, 1.0);
      EXPECT_GT(m.kappa, 0.0);
    }
  }
}

TEST(Material, ZeroRawOutputsGiveSoftplusShininess) {
  ParamTape tape;
  const NetworkField f = make_network(tape, 2, 3);
  f.mlp.set_output_layer(tape, 0.0, Eigen::VectorXd::Zero(7));
  const MaterialSample m = eval_material(f, tape, Vec3(5, 6, 7), f.frame);
  EXPECT_NEAR(m.kappa, 1.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(m.kappa, 1.4427, 1e-4);
  EXPECT_NEAR(m.rho, 0.5, 1e-12);
  EXPECT_TRUE(((m.albedo - 0.5).abs() < 1e-12).all());
  EXPECT_EQ(m.coeffs.size(), 2);
}

TEST(Material, BatchedMatchesPointEvaluation) {
  ParamTape tape;
  const NetworkField f = make_network(tape, 3, 5);
  CounterRng rng(2);
  Eigen::Array3Xd x(3, 20);
  for (int i = 0; i < 20; ++i) x.col(i) = 100.0 * warp::uniform_sphere(rng.uniform(), rng.uniform()).array();
  ad::Graph g(false);
  const MaterialNodes nodes = eval_material(g, MaterialField{f}, tape, g.constant(x));
  for (int i = 0; i < 20; ++i) {
    const MaterialSample m = eval_material(f, tape, x.col(i).matrix(), f.frame);
    EXPECT_NEAR(nodes.albedo.value()(0, i), m.albedo(0), 1e-12);
    EXPECT_NEAR(nodes.rho.value()(0, i), m.rho, 1e-12);
    EXPECT_NEAR(1.0 / nodes.inv_kappa.value()(0, i), m.kappa, 1e-9 * m.kappa);
    EXPECT_NEAR(nodes.coeffs.value()(2, i), m.coeffs(2), 1e-12);
  }
}

TEST(Material, LinearRampEndpointsAndHarmonicShininess) {
  LinearRampField f;
  f.from.albedo = RGB(0.2, 0.4, 0.6);
  f.from.rho = 0.1;
  f.from.kappa = 10.0;
  f.from.coeffs = Eigen::Vector2d(1, 0);
  f.to.albedo = RGB(0.6, 0.4, 0.2);
  f.to.rho = 0.3;
  f.to.kappa = 40.0;
  f.to.coeffs = Eigen::Vector2d(0, 1);
  const BoundingSphere omega;
  EXPECT_TRUE((eval_material(f, {}, Vec3(-120, 0, 0), omega).albedo == f.from.albedo).all());
  EXPECT_TRUE((eval_material(f, {}, Vec3(120, 0, 0), omega).albedo == f.to.albedo).all());
  const MaterialSample mid = eval_material(f, {}, Vec3(0, 50, 0), omega);
  EXPECT_NEAR(mid.rho, 0.2, 1e-12);
  EXPECT_NEAR(1.0 / mid.kappa, 0.5 * (0.1 + 0.025), 1e-12);
  EXPECT_NEAR(mid.coeffs(0), 0.5, 1e-12);
}

TEST(Material, TwoLobeCoefficientsSumToOne) {
  TwoLobeField f;
  CounterRng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = 100.0 * warp::uniform_sphere(rng.uniform(), rng.uniform());
    const MaterialSample m = eval_material(f, {}, x, BoundingSphere{});
    EXPECT_NEAR(m.coeffs.sum(), 1.0, 1e-12);
    EXPECT_GT(m.coeffs.minCoeff(), 0.0);
  }
}

TEST(IntegratedBasis, DefaultCountIsThree) { EXPECT_EQ(kDefaultBasisCount, 3); }

TEST(IntegratedBasis, LambertianSourceIsOne) {
  const IntegratedBasisFn basis = testing::cheap_basis({AnalyticBrdf::lambertian(), AnalyticBrdf::lambertian()});
  CounterRng rng(4);
  for (int i = 0; i < 20; ++i) {
    const Direction n = testing::random_direction(rng);
    Direction wo = testing::random_direction(rng);
    if (wo.dot(n) <= 0.0) wo = -wo;
    const Eigen::VectorXd b = eval_integrated_basis(basis, {}, wo, n);
    EXPECT_NEAR(b(0), 1.0, 1e-12);
    EXPECT_NEAR(b(1), 1.0, 1e-12);
  }
}

TEST(IntegratedBasis, BackFacingThrows) {
  const IntegratedBasisFn basis = testing::cheap_basis({AnalyticBrdf::lambertian()});
  EXPECT_THROW(eval_integrated_basis(basis, {}, Direction(0, 0, -1), Direction(0, 0, 1)), BackFacingError);
}

TEST(SpecularRadiance, Arithmetic) {
  MaterialSample m;
  m.rho = 0.06;
  m.coeffs = Eigen::Vector3d(1, 0, 0);
  const RGB s = specular_radiance(m, Eigen::Vector3d(2, 5, 7), RGB::Constant(0.5));
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(s(c), 0.06, 1e-15);
  m.rho = 0.0;
  EXPECT_TRUE((specular_radiance(m, Eigen::Vector3d(2, 5, 7), RGB::Constant(0.5)) == 0.0).all());
}

}  // namespace
}  // namespace facelight
