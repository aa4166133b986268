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

#include "facelight/calibration.hpp"
#include "facelight/loss.hpp"
#include "facelight/optimizer.hpp"
#include "facelight/render.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace facelight {

struct FitConfig {
  /// Scene to fit, relative to the config file.
  std::string scene;
  int steps = 2000;
  int batch_rays = 2048;
  /// Rays per gradient shard; shards are reduced in order.
  int shard_rays = 256;
  double lr = 1e-4;
  /// Steps between halvings; 0 selects steps / 8.
  long halving_interval = 0;
  LossWeights weights;
  std::uint64_t seed = 0;
  bool deterministic = true;
  int threads = 1;
  int eikonal_samples = 1024;
  bool learn_light = true;
  bool learn_beta = true;
  bool calibration = true;
  /// Per-group learning-rate multipliers (groups: displacement, material,
  /// basis, light, beta, calibration).
  std::map<std::string, double> lr_multipliers;
  int log_every = 100;
  /// Holdout evaluation period in steps; 0 evaluates only after the last step.
  int eval_every = 0;
  /// Checkpoint period in steps; 0 checkpoints only at the end.
  int checkpoint_every = 0;
  /// Output directory for metrics.csv, checkpoint.bin and scene.json; empty disables files.
  std::string out_dir;
  /// Checkpoint to resume from.
  std::string resume;
  /// Stop after this step index (exclusive) without changing the schedule; -1 runs to `steps`.
  int stop_at = -1;
  /// Ground-truth scene for the report's geometry and albedo errors; empty skips them.
  std::string truth;
};

FitConfig fit_config_from_json(const nlohmann::json& doc, bool strict = true);
nlohmann::json fit_config_to_json(const FitConfig& config);

struct TrainingView {
  Camera camera;
  Image image;
};

/// Views of one split ("train" or "test") with their images loaded from
/// paths relative to `base_dir`.
std::vector<TrainingView> load_views(const Scene& scene, const std::string& base_dir, const std::string& split);

struct FitLogRow {
  long step = 0;
  LossBreakdown loss;
  double psnr_holdout = std::numeric_limits<double>::quiet_NaN();
  double psnr_holdout_raw = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
};

struct FitResult {
  std::vector<FitLogRow> log;
  LossBreakdown final_loss;
  /// Mean holdout PSNR after per-image least-squares calibration, and raw.
  double psnr_holdout = std::numeric_limits<double>::quiet_NaN();
  double psnr_holdout_raw = std::numeric_limits<double>::quiet_NaN();
  double ssim_holdout = std::numeric_limits<double>::quiet_NaN();
  long steps_completed = 0;
  bool diverged = false;
  std::string diagnostic;
  Eigen::Index parameter_count = 0;
};

/// Trainable parameter count (scene networks plus light, beta and calibration).
Eigen::Index fit_parameter_count(const Scene& scene, const FitConfig& config, int train_views);

/// Optimizes scene parameters, light and beta against the training views and
/// writes them back into `scene`.
FitResult fit_scene(Scene& scene, const std::vector<TrainingView>& train, const std::vector<TrainingView>& holdout,
                    const FitConfig& config);

/// Holdout PSNR/SSIM of the scene against views (calibrated and raw PSNR).
struct HoldoutMetrics {
  double psnr = 0.0;
  double psnr_raw = 0.0;
  double ssim = 0.0;
};
HoldoutMetrics evaluate_views(const Scene& scene, const std::vector<TrainingView>& views, int threads = 1);

/// Mean |SDF_truth| at points sphere-traced on `recovered` from `directions`
/// Fibonacci directions at distance 2.5 x Omega radius toward its center.
double geometry_error(const SdfField& truth, const Scene& recovered, int directions = 1024);

/// Mean absolute albedo difference (over channels) between the two scenes'
/// materials at points sphere-traced on the truth surface, as above.
double albedo_error(const Scene& truth, const Scene& recovered, int directions = 1024);

/// Mean specular radiance (over channels) of the scene's own surface seen
/// from the same probe directions.
double specular_energy(const Scene& scene, int directions = 1024);

}  // namespace facelight
