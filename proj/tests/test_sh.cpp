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


#include "facelight/numerics.hpp"
#include "facelight/oracle.hpp"
#include "facelight/sh.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace facelight {
namespace {

using testing::random_direction;
using testing::random_light;

TEST(ShBasis, ConstantBand) {
  CounterRng rng(1);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(eval_sh_basis(random_direction(rng), 4)(0), 0.5 / std::sqrt(kPi), 1e-15);
  }
}

TEST(ShBasis, ZonalBandOneOnAxis) {
  const Eigen::VectorXd y = eval_sh_basis(Direction(0, 0, 1), 2);
  EXPECT_NEAR(y(sh_index(1, 0)), std::sqrt(3.0 / (4.0 * kPi)), 1e-15);
  EXPECT_NEAR(y(sh_index(1, 1)), 0.0, 1e-15);
  EXPECT_NEAR(y(sh_index(1, -1)), 0.0, 1e-15);
}

TEST(ShBasis, RejectsNonUnit) { EXPECT_THROW(eval_sh_basis(Vec3(1.0, 0.0, 0.1), 2), DomainError); }

// Addition theorem: sum_m Y_lm(a) Y_lm(b) = (2l + 1) / (4 pi) P_l(a . b).
TEST(ShBasis, AdditionTheorem) {
  CounterRng rng(2);
  const int l_max = 8;
  for (int trial = 0; trial < 50; ++trial) {
    const Direction a = random_direction(rng), b = random_direction(rng);
    const Eigen::VectorXd ya = eval_sh_basis(a, l_max), yb = eval_sh_basis(b, l_max);
    for (int l = 0; l <= l_max; ++l) {
      double s = 0.0;
      for (int m = -l; m <= l; ++m) s += ya(sh_index(l, m)) * yb(sh_index(l, m));
      EXPECT_NEAR(s, (2 * l + 1) / (4 * kPi) * legendre(l, a.dot(b)), 1e-12);
    }
  }
}

TEST(ShBasis, MonteCarloOrthogonality) {
  const int l_max = 3, n = sh_count(l_max);
  const std::size_t samples = 200000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n), sum2 = Eigen::MatrixXd::Zero(n, n);
  Sampler2D sampler(7, samples, false);
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::Vector2d u = sampler(i);
    const Eigen::VectorXd y = eval_sh_basis(Direction::from_unit(warp::uniform_sphere(u(0), u(1))), l_max);
    const Eigen::MatrixXd f = y * y.transpose() / warp::kUniformSpherePdf;
    sum += f;
    sum2 += f.cwiseProduct(f);
  }
  const double ns = static_cast<double>(samples);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double mean = sum(a, b) / ns;
      const double sigma = std::sqrt(std::max(sum2(a, b) / ns - mean * mean, 0.0) / ns);
      EXPECT_NEAR(mean, a == b ? 1.0 : 0.0, 3.0 * sigma + 1e-12) << a << "," << b;
    }
  }
}

TEST(ShBasis, GradientMatchesFiniteDifferences) {
  CounterRng rng(3);
  const int l_max = 5, n = sh_count(l_max);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 p = random_direction(rng).vec();
    std::vector<double> y(n), g(3 * n), yp(n), ym(n);
    sh_basis_into(p.x(), p.y(), p.z(), l_max, y.data(), g.data());
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 a = p, b = p;
      a(axis) += 1e-6;
      b(axis) -= 1e-6;
      sh_basis_into(a.x(), a.y(), a.z(), l_max, yp.data());
      sh_basis_into(b.x(), b.y(), b.z(), l_max, ym.data());
      for (int i = 0; i < n; ++i) EXPECT_NEAR(g[3 * i + axis], (yp[i] - ym[i]) / 2e-6, 1e-6);
    }
  }
}

TEST(Lambda, ClosedFormValues) {
  EXPECT_NEAR(lambda_coeff(0), kPi, 1e-14);
  EXPECT_NEAR(lambda_coeff(1), 2.0 * kPi / 3.0, 1e-14);
  EXPECT_NEAR(lambda_coeff(2), kPi / 4.0, 1e-14);
  EXPECT_EQ(lambda_coeff(3), 0.0);
  EXPECT_NEAR(lambda_coeff(4), -kPi / 24.0, 1e-14);
  EXPECT_EQ(lambda_coeff(5), 0.0);
  EXPECT_NEAR(lambda_coeff(6), kPi / 64.0, 1e-14);
}

// Lambda_l = 2 pi integral_0^1 P_l(t) t dt by Gauss-Legendre on [0, 1].
TEST(Lambda, MatchesHalfCosineQuadrature) {
  const GaussLegendre gl = gauss_legendre(32);
  for (int l = 0; l <= 10; ++l) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < gl.nodes.size(); ++i) {
      const double t = 0.5 * (gl.nodes(i) + 1.0);
      s += 0.5 * gl.weights(i) * legendre(l, t) * t;
    }
    EXPECT_NEAR(lambda_coeff(l), 2.0 * kPi * s, 1e-12) << l;
  }
}

TEST(DiffuseIrradiance, DcOnlyLight) {
  SHLight light(2);
  light.coeffs().col(0).setOnes();
  CounterRng rng(4);
  for (int i = 0; i < 10; ++i) {
    const RGB e = diffuse_irradiance(light, random_direction(rng));
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(e(c), kPi * 0.5 / std::sqrt(kPi), 1e-12);
  }
  EXPECT_NEAR(kPi * 0.5 / std::sqrt(kPi), 0.8862, 1e-4);
}

TEST(DiffuseIrradiance, ZeroLight) {
  EXPECT_TRUE((diffuse_irradiance(SHLight(4), Direction(0, 1, 0)) == 0.0).all());
}

TEST(DiffuseIrradiance, MatchesHemisphereIntegral) {
  CounterRng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const SHLight light = random_light(rng, 4);
    const Direction n = random_direction(rng);
    // Lambertian BRDF 1/pi integrates to E / pi.
    const McEstimate mc =
        mc_render_eq(AnalyticBrdf::lambertian(), n, n, light, 1000000, CounterRng::derive(99, trial));
    const RGB e = diffuse_irradiance(light, n) / kPi;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(e(c), mc.mean(c), 0.01 * std::abs(mc.mean(c)));
  }
}

TEST(VmfPdf, UniformLimit) {
  const VmfLobe lobe(Direction(0, 0, 1), 1e-9);
  EXPECT_NEAR(vmf_pdf(Direction(1, 0, 0), lobe), 1.0 / (4.0 * kPi), 1e-9);
  EXPECT_NEAR(vmf_pdf(Direction(0, 0, -1), lobe), 1.0 / (4.0 * kPi), 1e-9);
}

TEST(VmfPdf, IntegratesToOne) {
  for (double kappa : {1.0, 10.0, 100.0}) {
    const VmfLobe lobe(Direction(0.3, -0.2, 0.9), kappa);
    const std::size_t n = 400000;
    Sampler2D sampler(11, n, true);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d u = sampler(i);
      const double f = vmf_pdf(Direction::from_unit(warp::uniform_sphere(u(0), u(1))), lobe) / warp::kUniformSpherePdf;
      s += f;
      s2 += f * f;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, 1.0, 4.0 * se) << kappa;
  }
}

TEST(VmfPdf, StableAtLargeKappa) {
  const VmfLobe lobe(Direction(0, 0, 1), 100.0);
  const double v = vmf_pdf(Direction(0, 0, 1), lobe);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, 100.0 / (2.0 * kPi * (1.0 - std::exp(-200.0))), 1e-12);
  // Moderate kappa against the textbook sinh form.
  const VmfLobe mild(Direction(0, 0, 1), 3.0);
  const Direction d(0.6, 0.0, 0.8);
  EXPECT_NEAR(vmf_pdf(d, mild), 3.0 / (4.0 * kPi * std::sinh(3.0)) * std::exp(3.0 * 0.8), 1e-13);
}

TEST(PrefilteredSpecular, DeltaLimitReconstructsLight) {
  CounterRng rng(6);
  const SHLight light = random_light(rng, 4);
  const Direction r = random_direction(rng);
  const RGB p = prefiltered_specular_light(light, VmfLobe(r, 1e12));
  const RGB l = light.radiance(r).max(0.0);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(p(c), l(c), 1e-9);
}

TEST(PrefilteredSpecular, ZeroLight) {
  EXPECT_TRUE((prefiltered_specular_light(SHLight(4), VmfLobe(Direction(1, 0, 0), 64)) == 0.0).all());
}

TEST(PrefilteredSpecular, MatchesVmfExpectationWithShrinkingError) {
  CounterRng rng(8);
  const SHLight light = random_light(rng, 4);
  const Direction axis = random_direction(rng);
  double previous = std::numeric_limits<double>::infinity();
  for (double kappa : {16.0, 64.0}) {
    // E_vMF[L] by importance sampling the lobe itself.
    const std::size_t n = 1 << 20;
    Sampler2D sampler(CounterRng::derive(12, static_cast<std::uint64_t>(kappa)), n, true);
    const Frame frame(axis.vec());
    RGB sum = RGB::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d u = sampler(i);
      sum += light.radiance(Direction::from_unit(frame.to_world(warp::vmf(u(0), u(1), kappa))));
    }
    const RGB mc = sum / static_cast<double>(n);
    const RGB p = prefiltered_specular_light(light, VmfLobe(axis, kappa));
    const double err = ((p - mc).abs() / mc.abs()).maxCoeff();
    EXPECT_LT(err, 0.05) << kappa;
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(ProjectToSh, RoundTripsBandLimitedLight) {
  CounterRng rng(9);
  const SHLight light = random_light(rng, 6);
  const SHLight back = project_to_sh([&](const Vec3& d) { return light.radiance(Direction::from_unit(d)); }, 6, 16);
  EXPECT_LT((back.coeffs() - light.coeffs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ShLight, ConstantRadiance) {
  const SHLight light = SHLight::constant(RGB(0.2, 0.5, 1.0), 3);
  const RGB l = light.radiance(Direction(0.1, 0.7, -0.3));
  EXPECT_NEAR(l(0), 0.2, 1e-14);
  EXPECT_NEAR(l(1), 0.5, 1e-14);
  EXPECT_NEAR(l(2), 1.0, 1e-14);
  EXPECT_EQ(light.with_order(5).with_order(3), light);
}

}  // namespace
}  // namespace facelight
