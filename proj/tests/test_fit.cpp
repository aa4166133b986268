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


#include "facelight/fit.hpp"
#include "facelight/scene.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace facelight {
namespace {

namespace fs = std::filesystem;

Scene truth_scene(const SHLight& light) {
  LinearRampField ramp;
  ramp.axis = Vec3(1, 0.3, 0).normalized();
  ramp.lo = -90;
  ramp.hi = 90;
  ramp.from.albedo = RGB(0.7, 0.5, 0.4);
  ramp.from.rho = 0.08;
  ramp.from.kappa = 48;
  ramp.from.coeffs = Eigen::Vector2d(0.8, 0.2);
  ramp.to.albedo = RGB(0.45, 0.55, 0.65);
  ramp.to.rho = 0.05;
  ramp.to.kappa = 96;
  ramp.to.coeffs = Eigen::Vector2d(0.2, 0.8);
  Scene s = testing::sphere_scene(MaterialSample{}, light, {AnalyticBrdf::vmf_lobe(32), AnalyticBrdf::vmf_lobe(128)});
  s.material = ramp;
  s.seed = 1;
  for (int i = 0; i < 5; ++i) {
    const double a = 2.0 * kPi * i / 5.0;
    Camera c = Camera::look_at(330.0 * Vec3(std::sin(a), 0.3, std::cos(a)).normalized(), Vec3::Zero(), Vec3::UnitY(),
                               42.0 * kPi / 180.0, 20, 20);
    c.id = "cam" + std::to_string(i);
    c.split = i == 4 ? "test" : "train";
    s.cameras.push_back(c);
  }
  return s;
}

SHLight colored_light() {
  CounterRng rng(5);
  return testing::random_light(rng, 2, 1.5, 0.3);
}

// Same cameras and basis, with network displacement and material.
Scene network_scene(const Scene& truth) {
  Scene s = truth;
  s.params = ParamTape{};
  NetworkDisplacement d;
  d.mlp = Mlp(s.params, "displacement", {39, 8, 1}, {Activation::Softplus, 100.0});
  d.mlp.initialize(s.params, 11);
  d.mlp.set_output_layer(s.params, 0.0, Eigen::VectorXd::Zero(1));
  d.bands = 6;
  d.frame = s.geometry.omega;
  d.scale = 20.0;
  s.geometry.displacement = d;
  NetworkField m;
  m.k = 2;
  m.mlp = Mlp(s.params, "material", {3, 16, 7}, {Activation::Sine, 30.0});
  m.mlp.initialize(s.params, 12);
  m.frame = s.geometry.omega;
  s.material = m;
  s.beta = 0.1;
  return s;
}

std::vector<TrainingView> views_of(const Scene& truth, const std::string& split) {
  std::vector<TrainingView> v;
  for (const Camera& c : truth.cameras) {
    if (c.split == split) v.push_back({c, render_image(truth, c)});
  }
  return v;
}

FitConfig small_config(int steps) {
  FitConfig c;
  c.steps = steps;
  c.batch_rays = 64;
  c.shard_rays = 32;
  c.eikonal_samples = 64;
  c.seed = 9;
  c.log_every = 1;
  c.lr_multipliers = {{"material", 30.0}, {"displacement", 10.0}};
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("facelight_fit_" + name);
  fs::remove_all(p);
  return p;
}

class FitTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    truth_ = new Scene(truth_scene(colored_light()));
    train_ = new std::vector<TrainingView>(views_of(*truth_, "train"));
    holdout_ = new std::vector<TrainingView>(views_of(*truth_, "test"));
  }
  static void TearDownTestSuite() {
    delete truth_;
    delete train_;
    delete holdout_;
  }
  static Scene* truth_;
  static std::vector<TrainingView>* train_;
  static std::vector<TrainingView>* holdout_;
};

Scene* FitTest::truth_ = nullptr;
std::vector<TrainingView>* FitTest::train_ = nullptr;
std::vector<TrainingView>* FitTest::holdout_ = nullptr;

TEST_F(FitTest, ResumeReproducesUninterruptedRun) {
  FitConfig c = small_config(6);
  c.out_dir = temp_dir("full").string();
  Scene full = network_scene(*truth_);
  const FitResult a = fit_scene(full, *train_, {}, c);
  ASSERT_EQ(a.log.size(), 6u);

  c.out_dir = temp_dir("split").string();
  c.stop_at = 3;
  Scene first = network_scene(*truth_);
  const FitResult b = fit_scene(first, *train_, {}, c);
  EXPECT_EQ(b.steps_completed, 3);
  c.stop_at = -1;
  c.resume = (fs::path(c.out_dir) / "checkpoint.bin").string();
  Scene second = network_scene(*truth_);
  const FitResult r = fit_scene(second, *train_, {}, c);
  ASSERT_EQ(r.log.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(r.log[i].step, a.log[3 + i].step);
    EXPECT_NEAR(r.log[i].loss.total, a.log[3 + i].loss.total, 1e-6);
  }
  EXPECT_EQ(second.params.values(), full.params.values());
  fs::remove_all(temp_dir("full"));
  fs::remove_all(c.out_dir);
}

TEST_F(FitTest, DeterministicAcrossRunsAndThreads) {
  FitConfig c = small_config(4);
  c.calibration = true;
  Scene a = network_scene(*truth_), b = network_scene(*truth_), d = network_scene(*truth_);
  fit_scene(a, *train_, {}, c);
  fit_scene(b, *train_, {}, c);
  c.threads = 3;
  fit_scene(d, *train_, {}, c);
  EXPECT_EQ(a.params.values(), b.params.values());
  EXPECT_EQ(a.params.values(), d.params.values());
  EXPECT_EQ(a.light, b.light);
}

TEST_F(FitTest, LossDecreases) {
  FitConfig c = small_config(40);
  c.batch_rays = 128;
  c.lr = 1e-3;
  Scene s = network_scene(*truth_);
  const FitResult r = fit_scene(s, *train_, *holdout_, c);
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 5; ++i) {
    early += r.log[i].loss.rgb;
    late += r.log[r.log.size() - 1 - i].loss.rgb;
  }
  EXPECT_LT(late, 0.7 * early);
  EXPECT_TRUE(std::isfinite(r.psnr_holdout));
  EXPECT_EQ(r.steps_completed, 40);
}

TEST_F(FitTest, WritesMetricsCheckpointAndScene) {
  FitConfig c = small_config(3);
  c.out_dir = temp_dir("files").string();
  Scene s = network_scene(*truth_);
  fit_scene(s, *train_, *holdout_, c);
  for (const char* f : {"metrics.csv", "checkpoint.bin", "scene.json"}) EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / f)) << f;
  std::ifstream in(fs::path(c.out_dir) / "metrics.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,rgb,white,spec,eikonal,residual,total,psnr_holdout,psnr_holdout_raw,lr");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3);
  const Scene back = load_scene((fs::path(c.out_dir) / "scene.json").string());
  EXPECT_EQ(back.params.values(), s.params.values());
  fs::remove_all(c.out_dir);
}

TEST_F(FitTest, ParameterCountIncludesLightBetaAndCalibration) {
  FitConfig c = small_config(1);
  c.calibration = false;
  const Scene s = network_scene(*truth_);
  EXPECT_EQ(fit_parameter_count(s, c, 4), s.params.size() + 3 * 9 + 1);
  c.calibration = true;
  EXPECT_GT(fit_parameter_count(s, c, 4), s.params.size() + 3 * 9 + 1 + 4 * 8);
}

TEST_F(FitTest, NonFiniteParametersAreReported) {
  Scene s = network_scene(*truth_);
  s.params.values()(0) = std::numeric_limits<double>::quiet_NaN();
  const FitResult r = fit_scene(s, *train_, {}, small_config(3));
  EXPECT_TRUE(r.diverged);
  EXPECT_EQ(r.steps_completed, 0);
  EXPECT_FALSE(r.diagnostic.empty());
}

// At the ground truth every residual is at rounding level, so Adam's
// normalized steps can only wander by about lr per step.
TEST(Fit, GroundTruthIsStationary) {
  const Scene truth = truth_scene(SHLight::constant(RGB::Constant(1.2), 2));
  const auto train = views_of(truth, "train");
  FitConfig c = small_config(10);
  c.calibration = false;
  c.weights.spec = 0.0;
  c.learn_light = false;
  c.learn_beta = false;
  Scene frozen = truth;
  const FitResult r = fit_scene(frozen, train, {}, c);
  ASSERT_EQ(r.log.size(), 10u);
  for (std::size_t i = 1; i < r.log.size(); ++i) EXPECT_LE(r.log[i].loss.total, r.log[i - 1].loss.total + 1e-9);
  EXPECT_EQ(frozen.light, truth.light);

  c.learn_light = true;
  c.learn_beta = true;
  Scene learned = truth;
  const FitResult l = fit_scene(learned, train, {}, c);
  for (const auto& row : l.log) EXPECT_LT(row.loss.total, 1e-4);
  EXPECT_LT((learned.light.coeffs() - truth.light.coeffs()).cwiseAbs().maxCoeff(), 10 * c.lr);
}

TEST(Fit, GeometryErrorProbe) {
  Scene s = truth_scene(SHLight::constant(RGB::Ones(), 0));
  EXPECT_NEAR(geometry_error(s.geometry, s, 256), 0.0, 1e-9);
  Scene smaller = s;
  smaller.geometry.displacement = ConstantDisplacement{1.0};
  EXPECT_NEAR(geometry_error(s.geometry, smaller, 256), 1.0, 1e-3);
}

TEST(Fit, AlbedoErrorProbe) {
  const Scene s = truth_scene(SHLight::constant(RGB::Ones(), 0));
  EXPECT_NEAR(albedo_error(s, s, 256), 0.0, 1e-12);
  Scene shifted = s;
  auto ramp = std::get<LinearRampField>(s.material);
  ramp.from.albedo += RGB::Constant(0.1);
  ramp.to.albedo += RGB::Constant(0.1);
  shifted.material = ramp;
  EXPECT_NEAR(albedo_error(s, shifted, 256), 0.1, 1e-9);
}

TEST(Fit, SpecularEnergyProbe) {
  Scene s = truth_scene(colored_light());
  EXPECT_GT(specular_energy(s, 256), 0.0);
  auto ramp = std::get<LinearRampField>(s.material);
  ramp.from.rho = 0.0;
  ramp.to.rho = 0.0;
  s.material = ramp;
  EXPECT_EQ(specular_energy(s, 256), 0.0);
}

TEST(Fit, EvaluateViewsOnTruthHitsTheCap) {
  const Scene truth = truth_scene(colored_light());
  const HoldoutMetrics m = evaluate_views(truth, views_of(truth, "test"));
  EXPECT_EQ(m.psnr, kPsnrCap);
  EXPECT_EQ(m.psnr_raw, kPsnrCap);
  EXPECT_NEAR(m.ssim, 1.0, 1e-12);
}

}  // namespace
}  // namespace facelight
