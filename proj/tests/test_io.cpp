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


#include "facelight/blob.hpp"
#include "facelight/fit.hpp"
#include "facelight/scene.hpp"
#include "facelight/validate.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace facelight {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("facelight_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Blob, RoundTrip) {
  const fs::path dir = temp_dir("blob");
  const std::string path = (dir / "w.bin").string();
  const Eigen::VectorXd a = Eigen::VectorXd::Random(17), b = Eigen::VectorXd::Random(3);
  write_blob(path, {{"a", a}, {"b", b}}, {{"step", 12}});
  nlohmann::json meta;
  const auto arrays = read_blob(path, &meta);
  EXPECT_EQ(find_array(arrays, "a").data, a);
  EXPECT_EQ(find_array(arrays, "b").data, b);
  EXPECT_EQ(meta.at("step"), 12);
  EXPECT_THROW(find_array(arrays, "c"), std::exception);
  fs::remove_all(dir);
}

TEST(Blob, RejectsCorruptMagic) {
  const fs::path dir = temp_dir("corrupt");
  const std::string path = (dir / "w.bin").string();
  write_blob(path, {{"a", Eigen::VectorXd::Ones(2)}});
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(read_blob(path), std::exception);
  fs::remove_all(dir);
}

TEST(SceneJson, AnalyticSceneIsAFixedPoint) {
  const std::string path = std::string(FACELIGHT_SCENES) + "/blobs/scene.json";
  const Scene s = load_scene(path);
  const nlohmann::json once = scene_to_json(s);
  const nlohmann::json twice = scene_to_json(scene_from_json(once, parent_dir(path)));
  EXPECT_EQ(once, twice);
}

TEST(SceneJson, NetworkWeightsSurviveSaveAndLoad) {
  const std::string src = std::string(FACELIGHT_SCENES) + "/sphere/fit.json";
  Scene s = load_scene(src);
  ASSERT_GT(s.params.size(), 0);
  s.params.values() += 0.01 * Eigen::VectorXd::Random(s.params.size());
  const fs::path dir = temp_dir("scene");
  const std::string out = (dir / "scene.json").string();
  save_scene(s, out);
  const Scene back = load_scene(out);
  EXPECT_EQ(back.params.values(), s.params.values());
  EXPECT_EQ(scene_to_json(back, "scene.bin"), scene_to_json(s, "scene.bin"));
  fs::remove_all(dir);
}

TEST(SceneJson, StrictModeRejectsUnknownKeys) {
  nlohmann::json doc = load_json(std::string(FACELIGHT_SCENES) + "/blobs/scene.json");
  doc["colour"] = 1;
  EXPECT_THROW(scene_from_json(doc, "."), SchemaError);
  SceneLoadOptions lax;
  lax.strict = false;
  EXPECT_NO_THROW(scene_from_json(doc, std::string(FACELIGHT_SCENES) + "/blobs", lax));
}

TEST(SceneJson, RejectsOtherVersions) {
  nlohmann::json doc = load_json(std::string(FACELIGHT_SCENES) + "/blobs/scene.json");
  doc["version"] = 2;
  EXPECT_THROW(scene_from_json(doc, "."), SchemaError);
}

TEST(LightJson, RoundTrip) {
  CounterRng rng(1);
  const SHLight l = testing::random_light(rng, 3);
  EXPECT_EQ(light_from_json(light_to_json(l)), l);
}

TEST(Paths, ResolveAgainstBase) {
  EXPECT_EQ(resolve_path("a/b", "c.pfm"), "a/b/c.pfm");
  EXPECT_EQ(resolve_path("a/b", "/abs/c.pfm"), "/abs/c.pfm");
  EXPECT_EQ(parent_dir("x.json"), ".");
  EXPECT_EQ(parent_dir("d/x.json"), "d");
}

TEST(FitConfigJson, RoundTripAndValidation) {
  const nlohmann::json doc = load_json(std::string(FACELIGHT_SCENES) + "/sphere/fit_config.json");
  const FitConfig c = fit_config_from_json(doc);
  EXPECT_EQ(fit_config_to_json(fit_config_from_json(fit_config_to_json(c))), fit_config_to_json(c));
  nlohmann::json bad = doc;
  bad["stepz"] = 3;
  EXPECT_THROW(fit_config_from_json(bad), SchemaError);
  EXPECT_NO_THROW(fit_config_from_json(bad, false));
  bad = doc;
  bad["steps"] = 0;
  EXPECT_THROW(fit_config_from_json(bad), SchemaError);
  bad = doc;
  bad["lr"] = "fast";
  EXPECT_THROW(fit_config_from_json(bad), SchemaError);
}

TEST(ValidationCsv, HeaderAndQuoting) {
  const fs::path dir = temp_dir("csv");
  const std::string path = (dir / "v.csv").string();
  ValidationRow r;
  r.test = "t";
  r.parameter = "kappa=16, l=2";
  r.estimate = 1.5;
  write_validation_csv(path, {r});
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "test,parameter,estimate,std_error,reference,rel_error");
  EXPECT_EQ(line.rfind("t,\"kappa=16, l=2\",1.5", 0), 0u) << line;
  fs::remove_all(dir);
}

TEST(Validation, UnknownSuiteThrows) { EXPECT_THROW(run_validation("nope"), DomainError); }

}  // namespace
}  // namespace facelight
