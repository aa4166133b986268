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


#include "facelight/oracle.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace facelight {
namespace {

using testing::random_direction;
using testing::random_light;

MaterialSample lambert(double a) {
  MaterialSample m;
  m.albedo = RGB::Constant(a);
  m.rho = 0.0;
  m.coeffs = Eigen::VectorXd::Zero(1);
  return m;
}

TEST(RenderEq, LambertianUnderConstantLight) {
  const SHLight light = SHLight::constant(RGB::Ones(), 0);
  const std::vector<AnalyticBrdf> bases{AnalyticBrdf::vmf_lobe(32)};
  const Direction n(0.2, 0.3, 0.9);
  const McEstimate e = mc_render_eq(lambert(0.5), bases, n, n, light, 4096, 1);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(e.mean(c), 0.5, 1e-12);
}

TEST(RenderEq, ZeroLight) {
  const std::vector<AnalyticBrdf> bases{AnalyticBrdf::vmf_lobe(32)};
  MaterialSample m = lambert(0.7);
  m.rho = 0.2;
  m.coeffs = Eigen::VectorXd::Ones(1);
  const Direction n(0, 0, 1), wo(0.3, 0, 0.95);
  const McEstimate e = mc_render_eq(m, bases, n, wo, SHLight(2), 10000, 3);
  EXPECT_TRUE((e.mean.array() == 0.0).all());
  const McEstimate f = mc_render_eq(AnalyticBrdf::phong_lobe(20), n, wo, SHLight(2), 10000, 3);
  EXPECT_TRUE((f.mean.array() == 0.0).all());
}

TEST(RenderEq, IndependentOfThreadCount) {
  CounterRng rng(1);
  const SHLight light = random_light(rng, 4);
  const Direction n = random_direction(rng);
  McOptions one, four;
  four.threads = 4;
  const auto b = AnalyticBrdf::vmf_lobe(64);
  const McEstimate a1 = mc_render_eq(b, n, n, light, 300000, 17, one);
  const McEstimate a4 = mc_render_eq(b, n, n, light, 300000, 17, four);
  EXPECT_TRUE((a1.mean.array() == a4.mean.array()).all());
  EXPECT_TRUE((a1.std_error.array() == a4.std_error.array()).all());
  const McEstimate other = mc_render_eq(b, n, n, light, 300000, 18, one);
  EXPECT_FALSE((a1.mean.array() == other.mean.array()).all());
}

TEST(RenderEq, StandardErrorShrinksAsInverseSqrt) {
  CounterRng rng(2);
  const SHLight light = random_light(rng, 2);
  const Direction n(0, 0, 1), wo(0.5, 0, std::sqrt(0.75));
  McOptions opt;
  opt.sampling = HemisphereSampling::Uniform;
  opt.stratified = false;
  const auto b = AnalyticBrdf::phong_lobe(10);
  std::vector<double> logn, logse;
  for (std::size_t n_samples : {1u << 14, 1u << 16, 1u << 18}) {
    const McEstimate e = mc_render_eq(b, n, wo, light, n_samples, 5, opt);
    logn.push_back(std::log(static_cast<double>(n_samples)));
    logse.push_back(std::log(e.std_error(0)));
  }
  EXPECT_NEAR(regression_slope(logn, logse), -0.5, 0.1);
}

TEST(RenderEq, SamplingStrategiesAgree) {
  CounterRng rng(3);
  const SHLight light = random_light(rng, 4);
  const Direction n = random_direction(rng);
  const Direction wo(n.vec() + 0.4 * random_direction(rng).vec());
  if (wo.dot(n) <= 0.1) GTEST_SKIP();
  const auto b = AnalyticBrdf::vmf_lobe(16);
  std::vector<McEstimate> est;
  for (auto s : {HemisphereSampling::Uniform, HemisphereSampling::Cosine, HemisphereSampling::Lobe}) {
    McOptions opt;
    opt.sampling = s;
    est.push_back(mc_render_eq(b, n, wo, light, 1 << 20, 9, opt));
  }
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 1; i < est.size(); ++i) {
      const double se = std::hypot(est[0].std_error(c), est[i].std_error(c));
      EXPECT_NEAR(est[0].mean(c), est[i].mean(c), 5.0 * se);
    }
  }
}

TEST(VmfExpectation, ConstantBandIsExact) {
  for (double kappa : {1.0, 50.0, 1000.0}) {
    const McEstimate e = mc_vmf_expectation(0, 0, VmfLobe(Direction(0.3, 0.4, 0.5), kappa), 10000, 1);
    EXPECT_NEAR(e.value(), 0.5 / std::sqrt(kPi), 1e-13);
  }
}

TEST(VmfExpectation, ApproachesAttenuatedBasis) {
  const double y10 = std::sqrt(3.0 / (4.0 * kPi));
  double previous = std::numeric_limits<double>::infinity();
  for (double kappa : {4.0, 16.0, 64.0}) {
    const McEstimate e = mc_vmf_expectation(1, 0, VmfLobe(Direction(0, 0, 1), kappa), 1 << 20, 2);
    // E[cos] = coth(kappa) - 1 / kappa exactly.
    EXPECT_NEAR(e.value(), y10 * (1.0 / std::tanh(kappa) - 1.0 / kappa), 5.0 * e.std_error(0) + 1e-12);
    const double err = std::abs(e.value() - y10 * vmf_attenuation(1, kappa));
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(VmfExpectation, DeltaLimit) {
  const Direction axis(0.2, -0.5, 0.7);
  const Eigen::VectorXd y = eval_sh_basis(axis, 3);
  for (int l = 0; l <= 3; ++l) {
    for (int m = -l; m <= l; ++m) {
      const McEstimate e = mc_vmf_expectation(l, m, VmfLobe(axis, 1e6), 20000, 3);
      EXPECT_NEAR(e.value(), y(sh_index(l, m)), 1e-4);
    }
  }
}

TEST(BasisTable, LambertianIsOne) {
  BasisTableOptions opt;
  opt.nodes = 17;
  opt.samples_per_node = 4096;
  const MonotoneCubic t = integrate_basis_table(AnalyticBrdf::lambertian(), opt);
  for (double v : t.values()) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_NEAR(t(0.37), 1.0, 1e-12);
}

TEST(BasisTable, PhongNormalIncidence) {
  BasisTableOptions opt;
  opt.nodes = 9;
  opt.samples_per_node = 1 << 18;
  const auto b = AnalyticBrdf::phong_lobe(50);
  const MonotoneCubic t = integrate_basis_table(b, opt);
  const McEstimate direct = integrate_basis_mc(b, 1.0, 1 << 21, 77);
  EXPECT_NEAR(t(1.0), direct.value(), 0.005 * direct.value());
}

TEST(BasisTable, GrazingIsFiniteAndNonNegative) {
  BasisTableOptions opt;
  opt.nodes = 101;
  opt.samples_per_node = 4096;
  for (const auto& b : {AnalyticBrdf::vmf_lobe(256), AnalyticBrdf::phong_lobe(100)}) {
    const MonotoneCubic t = integrate_basis_table(b, opt);
    EXPECT_TRUE(std::isfinite(t(0.01)));
    EXPECT_GE(t(0.01), 0.0);
  }
}

TEST(BasisTable, VmfNormalIncidenceMatchesHemisphereOracle) {
  const AnalyticBasis basis = testing::cheap_basis({AnalyticBrdf::vmf_lobe(32)});
  const Direction n(0, 0, 1);
  const McEstimate mc = integrate_basis_mc(AnalyticBrdf::vmf_lobe(32), 1.0, 1 << 20, 5);
  const Eigen::VectorXd b = eval_integrated_basis(IntegratedBasisFn{basis}, ParamTape{}, n, n);
  EXPECT_NEAR(b(0), mc.value(), 0.01 * mc.value());
}

TEST(Phong, AttenuationClosedForms) {
  for (double e : {1.0, 5.0, 50.0}) {
    EXPECT_NEAR(phong_attenuation(0, e), 1.0, 1e-12);
    EXPECT_NEAR(phong_attenuation(1, e), (e + 1.0) / (e + 2.0), 1e-12);
  }
}

TEST(Phong, DeltaLimitUnderConstantLight) {
  const SHLight light = SHLight::constant(RGB(0.3, 0.6, 0.9), 4);
  const RGB s = phong_specular(Direction(0, 0, 1), Direction(0.3, 0, 0.9), 1e8, light);
  EXPECT_NEAR(s(0), 0.3, 1e-6);
  EXPECT_NEAR(s(1), 0.6, 1e-6);
  EXPECT_NEAR(s(2), 0.9, 1e-6);
}

TEST(Phong, ZeroLight) {
  EXPECT_TRUE((phong_specular(Direction(0, 0, 1), Direction(0, 0.5, 1), 10, SHLight(4)) == 0.0).all());
}

TEST(AnalyticBrdf, ReciprocalAndLinear) {
  CounterRng rng(4);
  const auto combo = AnalyticBrdf::low_rank_combo(
      {0.3, 0.7}, {AnalyticBrdf::vmf_lobe(20), AnalyticBrdf::phong_lobe(8)});
  for (int i = 0; i < 100; ++i) {
    const Vec3 n = random_direction(rng).vec();
    Vec3 a = random_direction(rng).vec(), b = random_direction(rng).vec();
    if (a.dot(n) < 0) a = -a;
    if (b.dot(n) < 0) b = -b;
    for (const auto& f : {AnalyticBrdf::lambertian(), AnalyticBrdf::vmf_lobe(40), AnalyticBrdf::phong_lobe(12), combo}) {
      EXPECT_NEAR(f.eval(a, b, n), f.eval(b, a, n), 1e-12 * (1.0 + f.eval(a, b, n)));
      EXPECT_TRUE(f.isotropic());
    }
    const double expect = 0.3 * combo.components[0].eval(a, b, n) + 0.7 * combo.components[1].eval(a, b, n);
    EXPECT_NEAR(combo.eval(a, b, n), expect, 1e-12);
  }
}

TEST(AnalyticBrdf, KindNamesRoundTrip) {
  for (auto k : {AnalyticBrdf::Kind::Lambertian, AnalyticBrdf::Kind::VmfLobe, AnalyticBrdf::Kind::PhongLobe,
                 AnalyticBrdf::Kind::LowRankCombo}) {
    EXPECT_EQ(brdf_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(brdf_kind_from_string("ggx"), DomainError);
}

TEST(OracleRender, LambertianSphereAndBlackBackground) {
  const Scene s = testing::sphere_scene(lambert(0.5), SHLight::constant(RGB::Ones(), 0), {AnalyticBrdf::vmf_lobe(32)});
  const Camera cam = testing::front_camera(16);
  OracleRenderOptions o;
  o.samples = 64;
  const Image img = oracle_render(s, cam, o);
  EXPECT_EQ(img.at(0, 0).abs().maxCoeff(), 0.0);
  // Uniform unit radiance on a Lambertian surface returns the albedo exactly.
  EXPECT_NEAR(img.at(8, 8).maxCoeff(), 0.5, 1e-12);
  EXPECT_NEAR(img.at(8, 8).minCoeff(), 0.5, 1e-12);
}

TEST(OracleRender, IndependentOfThreadCount) {
  CounterRng rng(11);
  Scene s = testing::sphere_scene(lambert(0.6), random_light(rng, 2), {AnalyticBrdf::vmf_lobe(32)});
  const Camera cam = testing::front_camera(12);
  OracleRenderOptions o;
  o.samples = 32;
  o.seed = 4;
  const Image a = oracle_render(s, cam, o);
  o.threads = 3;
  const Image b = oracle_render(s, cam, o);
  EXPECT_TRUE((a.pixels == b.pixels).all());
}

}  // namespace
}  // namespace facelight
