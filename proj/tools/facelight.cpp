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
#include "facelight/image.hpp"
#include "facelight/oracle.hpp"
#include "facelight/scene.hpp"
#include "facelight/validate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace facelight;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGate = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string scene;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = false;
  int threads = 1;
};

void add_threads(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "Worker threads")->envname("FACELIGHT_THREADS")->check(CLI::PositiveNumber);
  app->add_flag("--deterministic", c.deterministic, "Static work assignment for bitwise-reproducible output");
}

std::vector<const Camera*> select_cameras(const Scene& scene, bool holdout, const std::string& only) {
  std::vector<const Camera*> out;
  for (const auto& cam : scene.cameras) {
    if (holdout && cam.split != "test") continue;
    if (!only.empty() && cam.id != only) continue;
    out.push_back(&cam);
  }
  return out;
}

int render_cameras(const Scene& scene, const std::vector<const Camera*>& cameras, const Common& c, bool png,
                   std::size_t oracle_samples = 0) {
  if (cameras.empty()) {
    std::cerr << "no cameras selected\n";
    return kExitUsage;
  }
  fs::create_directories(c.out);
  RenderOptions opt;
  opt.threads = c.threads;
  opt.deterministic = c.deterministic;
  for (const Camera* cam : cameras) {
    RenderStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    Image img;
    if (oracle_samples > 0) {
      OracleRenderOptions o;
      o.samples = oracle_samples;
      o.seed = scene.seed;
      o.threads = c.threads;
      img = oracle_render(scene, *cam, o);
    } else {
      img = render_image(scene, *cam, opt, &stats);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path base = fs::path(c.out) / cam->id;
    write_pfm(img, base.string() + ".pfm");
    if (png) write_png(img, base.string() + ".png");
    if (oracle_samples > 0) {
      std::printf("%s %dx%d wall %.3fs oracle %zu spp\n", cam->id.c_str(), img.width, img.height, wall, oracle_samples);
      continue;
    }
    std::printf("%s %dx%d wall %.3fs trace %.3fs shade %.3fs integrate %.3fs rays %zu hits %zu cap %zu\n",
                cam->id.c_str(), img.width, img.height, wall, stats.trace_seconds, stats.shade_seconds,
                stats.integrate_seconds, stats.rays, stats.hits, stats.cap_pixels.size());
  }
  return kExitOk;
}

int cmd_render(const Common& c, bool holdout, const std::string& camera, bool png, const std::string& light,
               std::size_t oracle_samples) {
  Scene scene = load_scene(c.scene);
  if (c.seed_set) scene.seed = c.seed;
  if (!light.empty()) scene.light = load_light(light);
  return render_cameras(scene, select_cameras(scene, holdout, camera), c, png, oracle_samples);
}

int cmd_fit(Common c, bool dry_run) {
  FitConfig cfg = fit_config_from_json(load_json(c.config));
  const std::string base = parent_dir(c.config);
  if (c.seed_set) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!cfg.out_dir.empty()) cfg.out_dir = resolve_path(base, cfg.out_dir);
  if (!cfg.resume.empty()) cfg.resume = resolve_path(base, cfg.resume);
  if (!cfg.truth.empty()) cfg.truth = resolve_path(base, cfg.truth);
  cfg.threads = c.threads;
  cfg.deterministic = cfg.deterministic || c.deterministic;
  if (cfg.scene.empty()) throw SchemaError("config: 'scene' is required");
  const std::string scene_path = resolve_path(base, cfg.scene);
  Scene scene = load_scene(scene_path);
  const auto train_cameras = std::count_if(scene.cameras.begin(), scene.cameras.end(),
                                           [](const Camera& cam) { return cam.split == "train"; });
  if (train_cameras == 0) throw SchemaError("scene has no training views");
  if (dry_run) {
    if (!cfg.truth.empty()) load_scene(cfg.truth);
    std::printf("parameters %lld\n",
                static_cast<long long>(fit_parameter_count(scene, cfg, static_cast<int>(train_cameras))));
    return kExitOk;
  }
  const std::vector<TrainingView> train = load_views(scene, parent_dir(scene_path), "train");
  const std::vector<TrainingView> test = load_views(scene, parent_dir(scene_path), "test");
  const FitResult r = fit_scene(scene, train, test, cfg);
  for (const auto& row : r.log) {
    std::printf("step %ld total %.6g rgb %.6g lr %.3g\n", row.step, row.loss.total, row.loss.rgb, row.lr);
  }
  if (r.diverged) {
    std::fprintf(stderr, "fit diverged: %s\n", r.diagnostic.c_str());
    return kExitGate;
  }
  nlohmann::json report = {{"steps", r.steps_completed}, {"parameters", r.parameter_count},
                           {"final_loss", r.final_loss.total}};
  if (!test.empty()) {
    report["psnr"] = r.psnr_holdout;
    report["psnr_raw"] = r.psnr_holdout_raw;
    report["ssim"] = r.ssim_holdout;
  }
  if (!cfg.truth.empty()) {
    const Scene truth = load_scene(cfg.truth);
    report["geom_err"] = geometry_error(truth.geometry, scene);
    report["albedo_err"] = albedo_error(truth, scene);
  }
  if (!cfg.out_dir.empty()) std::ofstream(fs::path(cfg.out_dir) / "report.json") << report.dump(2) << '\n';
  std::printf("%s\n", report.dump().c_str());
  return kExitOk;
}

int cmd_validate(const Common& c, const std::string& suite) {
  ValidationOptions opt;
  opt.threads = c.threads;
  if (c.seed_set) opt.seed = c.seed;
  const std::vector<ValidationRow> rows = run_validation(suite, opt);
  if (!c.out.empty()) {
    const fs::path dir = fs::path(c.out).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    write_validation_csv(c.out, rows);
  }
  int failed = 0;
  for (const auto& r : rows) {
    if (r.pass) continue;
    ++failed;
    std::printf("FAIL %s %s estimate %.9g reference %.9g rel_error %.3g\n", r.test.c_str(), r.parameter.c_str(),
                r.estimate, r.reference, r.rel_error);
  }
  std::printf("%zu rows, %d failed\n", rows.size(), failed);
  return failed == 0 ? kExitOk : kExitGate;
}

int cmd_metrics(const std::string& a, const std::string& b) {
  const MetricsReport m = compute_metrics(read_image(a), read_image(b));
  std::printf("%s\n", nlohmann::json{{"psnr", m.psnr}, {"ssim", m.ssim}}.dump().c_str());
  return kExitOk;
}

int cmd_sh_from_pfm(const Common& c, const std::string& image, int l_max, std::size_t samples) {
  const SHLight light = sh_from_equirect(read_image(image), l_max, samples, c.seed);
  save_light(light, c.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facelight rendering, validation and fitting"};
  app.require_subcommand(1);
  Common c;

  bool holdout = false, png = false, dry_run = false;
  std::string camera, light, suite = "all", image_a, image_b, env;
  int l_max = 4;
  std::size_t samples = std::size_t{1} << 20;
  std::size_t oracle_samples = 0;

  auto* render = app.add_subcommand("render", "Render scene cameras to PFM");
  render->add_option("--scene", c.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--out", c.out, "Output directory")->required();
  render->add_flag("--holdout", holdout, "Only test-split cameras");
  render->add_option("--camera", camera, "Only this camera id");
  render->add_flag("--png", png, "Also write sRGB PNG");
  render->add_option("--seed", c.seed, "Scene seed override")->each([&](const std::string&) { c.seed_set = true; });
  render->add_option("--oracle", oracle_samples, "Monte-Carlo ground truth with this many samples per pixel");
  add_threads(render, c);

  auto* relight = app.add_subcommand("relight", "Swap the SH light and re-render");
  relight->add_option("--scene", c.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  relight->add_option("--light", light, "Light JSON")->required()->check(CLI::ExistingFile);
  relight->add_option("--out", c.out, "Output directory")->required();
  relight->add_flag("--holdout", holdout, "Only test-split cameras");
  relight->add_option("--camera", camera, "Only this camera id");
  relight->add_flag("--png", png, "Also write sRGB PNG");
  add_threads(relight, c);

  auto* fit = app.add_subcommand("fit", "Fit scene parameters to images");
  fit->add_option("--config", c.config, "Fit config JSON")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", c.out, "Output directory (overrides out_dir)");
  fit->add_option("--seed", c.seed, "Seed override")->each([&](const std::string&) { c.seed_set = true; });
  fit->add_flag("--dry-run", dry_run, "Validate and print the parameter count");
  add_threads(fit, c);

  auto* validate = app.add_subcommand("validate", "Run oracle comparisons");
  validate->add_option("--suite", suite, "Suite name")
      ->check(CLI::IsMember({"sh", "vmf", "splitsum", "gradients", "volume", "calibration", "all"}));
  validate->add_option("--out", c.out, "CSV output");
  validate->add_option("--seed", c.seed, "Seed override")->each([&](const std::string&) { c.seed_set = true; });
  add_threads(validate, c);

  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM between two images");
  metrics->add_option("a", image_a, "Image")->required()->check(CLI::ExistingFile);
  metrics->add_option("b", image_b, "Reference image")->required()->check(CLI::ExistingFile);

  auto* sh = app.add_subcommand("sh-from-pfm", "Project an equirectangular environment onto SH");
  sh->add_option("--image", env, "Equirectangular PFM or PNG")->required()->check(CLI::ExistingFile);
  sh->add_option("--l-max", l_max, "Band limit")->check(CLI::Range(0, kMaxShOrder));
  sh->add_option("--samples", samples, "Monte-Carlo samples");
  sh->add_option("--seed", c.seed, "Seed");
  sh->add_option("--out", c.out, "Light JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*render) return cmd_render(c, holdout, camera, png, "", oracle_samples);
    if (*relight) return cmd_render(c, holdout, camera, png, light, 0);
    if (*fit) return cmd_fit(c, dry_run);
    if (*validate) return cmd_validate(c, suite);
    if (*metrics) return cmd_metrics(image_a, image_b);
    if (*sh) return cmd_sh_from_pfm(c, env, l_max, samples);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGate;
  }
  return kExitUsage;
}
