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

#include "facelight/blob.hpp"
#include "facelight/numerics.hpp"
#include "facelight/rng.hpp"
#include "facelight/scene.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <thread>

namespace facelight {

using nlohmann::json;

FitConfig fit_config_from_json(const json& doc, bool strict) {
  check_keys(doc,
             {"scene", "steps", "batch_rays", "shard_rays", "lr", "halving_interval", "weights", "seed", "deterministic",
              "threads", "eikonal_samples", "learn_light", "learn_beta", "calibration", "lr_multipliers", "log_every",
              "eval_every", "checkpoint_every", "out_dir", "resume", "stop_at", "truth"},
             "config", strict);
  FitConfig c;
  try {
    c.scene = doc.value("scene", c.scene);
    c.steps = doc.value("steps", c.steps);
    c.batch_rays = doc.value("batch_rays", c.batch_rays);
    c.shard_rays = doc.value("shard_rays", c.shard_rays);
    c.lr = doc.value("lr", c.lr);
    c.halving_interval = doc.value("halving_interval", c.halving_interval);
    c.seed = doc.value("seed", c.seed);
    c.deterministic = doc.value("deterministic", c.deterministic);
    c.threads = doc.value("threads", c.threads);
    c.eikonal_samples = doc.value("eikonal_samples", c.eikonal_samples);
    c.learn_light = doc.value("learn_light", c.learn_light);
    c.learn_beta = doc.value("learn_beta", c.learn_beta);
    c.calibration = doc.value("calibration", c.calibration);
    c.log_every = doc.value("log_every", c.log_every);
    c.eval_every = doc.value("eval_every", c.eval_every);
    c.checkpoint_every = doc.value("checkpoint_every", c.checkpoint_every);
    c.out_dir = doc.value("out_dir", c.out_dir);
    c.resume = doc.value("resume", c.resume);
    c.stop_at = doc.value("stop_at", c.stop_at);
    c.truth = doc.value("truth", c.truth);
    if (doc.contains("weights")) {
      const json& w = doc.at("weights");
      check_keys(w, {"rgb", "white", "spec", "eikonal", "residual"}, "config.weights", strict);
      c.weights.rgb = w.value("rgb", c.weights.rgb);
      c.weights.white = w.value("white", c.weights.white);
      c.weights.spec = w.value("spec", c.weights.spec);
      c.weights.eikonal = w.value("eikonal", c.weights.eikonal);
      c.weights.residual = w.value("residual", c.weights.residual);
    }
    if (doc.contains("lr_multipliers")) c.lr_multipliers = doc.at("lr_multipliers").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  if (c.steps < 1 || c.batch_rays < 1 || c.shard_rays < 1 || !(c.lr > 0.0) || c.eikonal_samples < 1 || c.log_every < 1 ||
      c.halving_interval < 0 || c.eval_every < 0 || c.checkpoint_every < 0 || c.threads < 1) {
    throw SchemaError("config: values out of range");
  }
  for (const auto& [group, m] : c.lr_multipliers) {
    if (!(m >= 0.0)) throw SchemaError("config.lr_multipliers: '" + group + "' must be non-negative");
  }
  return c;
}

json fit_config_to_json(const FitConfig& c) {
  return {{"scene", c.scene},
          {"steps", c.steps},
          {"batch_rays", c.batch_rays},
          {"shard_rays", c.shard_rays},
          {"lr", c.lr},
          {"halving_interval", c.halving_interval},
          {"weights",
           {{"rgb", c.weights.rgb},
            {"white", c.weights.white},
            {"spec", c.weights.spec},
            {"eikonal", c.weights.eikonal},
            {"residual", c.weights.residual}}},
          {"seed", c.seed},
          {"deterministic", c.deterministic},
          {"threads", c.threads},
          {"eikonal_samples", c.eikonal_samples},
          {"learn_light", c.learn_light},
          {"learn_beta", c.learn_beta},
          {"calibration", c.calibration},
          {"lr_multipliers", c.lr_multipliers},
          {"log_every", c.log_every},
          {"eval_every", c.eval_every},
          {"checkpoint_every", c.checkpoint_every},
          {"out_dir", c.out_dir},
          {"resume", c.resume},
          {"stop_at", c.stop_at},
          {"truth", c.truth}};
}

std::vector<TrainingView> load_views(const Scene& scene, const std::string& base_dir, const std::string& split) {
  std::vector<TrainingView> views;
  for (const auto& cam : scene.cameras) {
    if (cam.split != split) continue;
    if (cam.image.empty()) throw SchemaError("camera '" + cam.id + "' has no image");
    Image img;
    try {
      img = read_image(resolve_path(base_dir, cam.image));
    } catch (const std::runtime_error& e) {
      throw SchemaError(e.what());
    }
    if (img.width != cam.width || img.height != cam.height) {
      throw SchemaError("image of camera '" + cam.id + "' does not match its resolution");
    }
    views.push_back({cam, std::move(img)});
  }
  return views;
}

namespace {

/// Working state: the scene tape extended with light, beta and calibration.
struct Trainer {
  Scene& scene;
  const FitConfig& config;
  ParamTape tape;
  Eigen::Index scene_params = 0;
  ParamSlice light;
  ParamSlice log_beta;
  CalibrationNetwork calibration;
  bool has_calibration = false;

  Trainer(Scene& s, const FitConfig& c, int views) : scene(s), config(c), tape(s.params) {
    scene_params = tape.size();
    light = tape.allocate("light", 3 * static_cast<Eigen::Index>(scene.light.count()));
    tape.view(light) = Eigen::Map<const Eigen::VectorXd>(scene.light.coeffs().data(), light.size);
    log_beta = tape.allocate("beta", 1);
    tape.view(log_beta)(0) = std::log(scene.beta);
    if (c.calibration && views > 0) {
      calibration = CalibrationNetwork(tape, views, CounterRng::derive(c.seed, 3));
      has_calibration = true;
    }
    if (!c.learn_light) tape.set_lr_multiplier("light", 0.0);
    if (!c.learn_beta) tape.set_lr_multiplier("beta", 0.0);
    for (const auto& [group, m] : c.lr_multipliers) {
      if (tape.find_group(group) >= 0) tape.set_lr_multiplier(group, m);
    }
  }

  ShadingModel model() const { return {&scene.geometry, &scene.material, &scene.basis, &tape}; }
  int l_max() const { return scene.light.l_max(); }
  ad::Node light_node(ad::Graph& g) const { return g.parameter(tape, light, 3, scene.light.count()); }
  ad::Node beta_node(ad::Graph& g) const { return ad::exp(g.parameter(tape, log_beta, 1, 1)); }

  /// Scene with the current parameters written back.
  void commit(Scene& out) const {
    out.params.values() = tape.values().head(scene_params);
    out.light.coeffs() = Eigen::Map<const Eigen::MatrixXd>(tape.values().data() + light.offset, 3, scene.light.count());
    out.beta = std::exp(tape.values()(log_beta.offset));
  }
};

struct ShardOutput {
  Eigen::VectorXd grad;
  double rgb_sum = 0.0;
  double spec_sum = 0.0;
};

struct RaySample {
  int view;
  int x;
  int y;
};

std::vector<RaySample> draw_batch(const FitConfig& config, const std::vector<TrainingView>& train, long step) {
  CounterRng rng(CounterRng::derive(config.seed, 0x1000000ULL + static_cast<std::uint64_t>(step)));
  std::vector<RaySample> batch(static_cast<std::size_t>(config.batch_rays));
  for (auto& r : batch) {
    r.view = static_cast<int>(rng.below(train.size()));
    const Camera& c = train[static_cast<std::size_t>(r.view)].camera;
    r.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.width)));
    r.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.height)));
  }
  return batch;
}

ShardOutput run_shard(const Trainer& tr, const std::vector<TrainingView>& train, const std::vector<RaySample>& batch,
                      std::size_t begin, std::size_t end) {
  const auto n = static_cast<Eigen::Index>(end - begin);
  std::vector<Ray> rays;
  std::vector<Eigen::Index> views;
  ad::Array observed(3, n);
  for (std::size_t i = begin; i < end; ++i) {
    const RaySample& r = batch[i];
    const TrainingView& v = train[static_cast<std::size_t>(r.view)];
    rays.push_back(v.camera.generate_ray(r.x + 0.5, r.y + 0.5));
    views.push_back(r.view);
    observed.col(static_cast<Eigen::Index>(i - begin)) = v.image.at(r.x, r.y);
  }
  const RayBatch rb = plan_rays(tr.scene.geometry, tr.tape, rays, tr.scene.settings);
  ad::Graph g(true);
  const RayRender rr = render_rays(g, tr.model(), rb, tr.light_node(g), tr.l_max(), tr.beta_node(g));
  const ad::Node rendered = tr.has_calibration ? tr.calibration.apply(g, tr.tape, rr.rgb, views) : rr.rgb;
  const double denom = 3.0 * static_cast<double>(tr.config.batch_rays);
  const ad::Node rgb_sum = ad::sum(ad::abs(rendered - g.constant(std::move(observed))));
  const ad::Node spec_sum = ad::sum(rr.specular);
  const ad::Node loss = (tr.config.weights.rgb / denom) * rgb_sum + (tr.config.weights.spec / denom) * spec_sum;
  ShardOutput out;
  out.grad = Eigen::VectorXd::Zero(tr.tape.size());
  g.backward(loss, out.grad);
  out.rgb_sum = rgb_sum.scalar();
  out.spec_sum = spec_sum.scalar();
  return out;
}

Eigen::Array3Xd uniform_ball(const BoundingSphere& omega, int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::Array3Xd x(3, n);
  for (int i = 0; i < n; ++i) {
    const Vec3 d = warp::uniform_sphere(rng.uniform(), rng.uniform());
    const double r = omega.radius * std::cbrt(rng.uniform());
    x.col(i) = (omega.center + r * d).array();
  }
  return x;
}

/// One optimization step's loss and gradient (into tr.tape.grads()).
LossBreakdown evaluate_step(Trainer& tr, const std::vector<TrainingView>& train, long step) {
  const FitConfig& cfg = tr.config;
  const std::vector<RaySample> batch = draw_batch(cfg, train, step);
  const std::size_t shard = static_cast<std::size_t>(cfg.shard_rays);
  const std::size_t shards = (batch.size() + shard - 1) / shard;
  std::vector<ShardOutput> outs(shards);
  const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(shards)));
  auto work = [&](std::size_t s) { outs[s] = run_shard(tr, train, batch, s * shard, std::min(batch.size(), (s + 1) * shard)); };
  if (workers == 1) {
    for (std::size_t s = 0; s < shards; ++s) work(s);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t s = static_cast<std::size_t>(w); s < shards; s += static_cast<std::size_t>(workers)) work(s);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Terms that do not depend on the ray batch.
  ad::Graph g(true);
  const Eigen::Array3Xd sites =
      uniform_ball(tr.scene.geometry.omega, cfg.eikonal_samples, CounterRng::derive(cfg.seed, 0x2000000ULL + static_cast<std::uint64_t>(step)));
  const SdfNodes sdf = sdf_eval(g, tr.scene.geometry, tr.tape, sites, true);
  const ad::Node white = loss_white(tr.light_node(g), tr.l_max());
  const ad::Node eikonal = loss_eikonal(sdf.gradient);
  const ad::Node residual = ad::mean(ad::abs(sdf.displacement));
  const ad::Node global = cfg.weights.white * white + cfg.weights.eikonal * eikonal + cfg.weights.residual * residual;

  tr.tape.zero_grad();
  g.backward(global, tr.tape.grads());
  LossBreakdown lb;
  for (const auto& o : outs) {
    tr.tape.grads() += o.grad;
    lb.rgb += o.rgb_sum;
    lb.spec += o.spec_sum;
  }
  const double denom = 3.0 * static_cast<double>(batch.size());
  lb.rgb /= denom;
  lb.spec /= denom;
  lb.white = white.scalar();
  lb.eikonal = eikonal.scalar();
  lb.residual = residual.scalar();
  const LossWeights& w = cfg.weights;
  lb.total = w.rgb * lb.rgb + w.white * lb.white + w.spec * lb.spec + w.eikonal * lb.eikonal + w.residual * lb.residual;
  return lb;
}

void save_checkpoint(const Trainer& tr, const AdamState& state, const std::string& path) {
  write_blob(path, {{"params", tr.tape.values()}, {"adam_m", state.m}, {"adam_v", state.v}},
             {{"step", state.step}, {"scene_params", tr.scene_params}});
}

void write_metrics(const std::string& path, const std::vector<FitLogRow>& log, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (!append) out << "step,rgb,white,spec,eikonal,residual,total,psnr_holdout,psnr_holdout_raw,lr\n";
  out << std::setprecision(10);
  for (const auto& r : log) {
    out << r.step << ',' << r.loss.rgb << ',' << r.loss.white << ',' << r.loss.spec << ',' << r.loss.eikonal << ','
        << r.loss.residual << ',' << r.loss.total << ',';
    if (!std::isnan(r.psnr_holdout)) out << r.psnr_holdout;
    out << ',';
    if (!std::isnan(r.psnr_holdout_raw)) out << r.psnr_holdout_raw;
    out << ',' << r.lr << '\n';
  }
}

}  // namespace

HoldoutMetrics evaluate_views(const Scene& scene, const std::vector<TrainingView>& views, int threads) {
  HoldoutMetrics m;
  if (views.empty()) return m;
  RenderOptions opt;
  opt.threads = threads;
  for (const auto& v : views) {
    const Image rendered = render_image(scene, v.camera, opt);
    const Image calibrated = calibrate_apply(calibrate_solve(rendered, v.image), rendered);
    m.psnr += psnr(calibrated, v.image);
    m.psnr_raw += psnr(rendered, v.image);
    m.ssim += ssim(calibrated, v.image);
  }
  const double n = static_cast<double>(views.size());
  m.psnr /= n;
  m.psnr_raw /= n;
  m.ssim /= n;
  return m;
}

double geometry_error(const SdfField& truth, const Scene& recovered, int directions) {
  const ParamTape empty;
  const Eigen::Matrix3Xd dirs = fibonacci_sphere(directions);
  const BoundingSphere& omega = recovered.geometry.omega;
  double sum = 0.0;
  int hits = 0;
  for (int i = 0; i < directions; ++i) {
    const Vec3 d = dirs.col(i);
    const Ray ray{omega.center + 2.5 * omega.radius * d, Direction(-d)};
    const TraceResult tr = sphere_trace(recovered.geometry, recovered.params, ray, recovered.settings.trace);
    if (!tr.hit()) continue;
    sum += std::abs(sdf_eval(truth, empty, ray.at(tr.t0)));
    ++hits;
  }
  if (hits == 0) return std::numeric_limits<double>::infinity();
  return sum / hits;
}

double albedo_error(const Scene& truth, const Scene& recovered, int directions) {
  const Eigen::Matrix3Xd dirs = fibonacci_sphere(directions);
  const BoundingSphere& omega = truth.geometry.omega;
  double sum = 0.0;
  int hits = 0;
  for (int i = 0; i < directions; ++i) {
    const Vec3 d = dirs.col(i);
    const Ray ray{omega.center + 2.5 * omega.radius * d, Direction(-d)};
    const TraceResult tr = sphere_trace(truth.geometry, truth.params, ray, truth.settings.trace);
    if (!tr.hit()) continue;
    const Vec3 x = ray.at(tr.t0);
    const RGB a = eval_material(truth.material, truth.params, x, omega).albedo;
    const RGB b = eval_material(recovered.material, recovered.params, x, recovered.geometry.omega).albedo;
    sum += (a - b).abs().mean();
    ++hits;
  }
  if (hits == 0) return std::numeric_limits<double>::infinity();
  return sum / hits;
}

double specular_energy(const Scene& scene, int directions) {
  const Eigen::Matrix3Xd dirs = fibonacci_sphere(directions);
  const BoundingSphere& omega = scene.geometry.omega;
  double sum = 0.0;
  int hits = 0;
  for (int i = 0; i < directions; ++i) {
    const Vec3 d = dirs.col(i);
    const Ray ray{omega.center + 2.5 * omega.radius * d, Direction(-d)};
    const TraceResult tr = sphere_trace(scene.geometry, scene.params, ray, scene.settings.trace);
    if (!tr.hit()) continue;
    RGB diffuse, specular;
    shade(ray.at(tr.t0), Direction(d), scene.geometry, scene.material, scene.basis, scene.light, scene.params, &diffuse,
          &specular);
    sum += specular.mean();
    ++hits;
  }
  if (hits == 0) return std::numeric_limits<double>::infinity();
  return sum / hits;
}

Eigen::Index fit_parameter_count(const Scene& scene, const FitConfig& config, int train_views) {
  Scene copy = scene;
  const Trainer tr(copy, config, train_views);
  return tr.tape.size();
}

FitResult fit_scene(Scene& scene, const std::vector<TrainingView>& train, const std::vector<TrainingView>& holdout,
                    const FitConfig& config) {
  if (train.empty()) throw DomainError("fit_scene: no training views");
  FitResult result;
  Trainer tr(scene, config, static_cast<int>(train.size()));
  result.parameter_count = tr.tape.size();
  AdamState state;
  long start = 0;
  if (!config.resume.empty()) {
    json meta;
    const auto arrays = read_blob(config.resume, &meta);
    const Eigen::VectorXd& params = find_array(arrays, "params").data;
    if (params.size() != tr.tape.size()) throw SchemaError("checkpoint does not match the scene and config");
    tr.tape.values() = params;
    state.m = find_array(arrays, "adam_m").data;
    state.v = find_array(arrays, "adam_v").data;
    state.step = meta.at("step").get<long>();
    start = state.step;
  }
  const bool files = !config.out_dir.empty();
  if (files) std::filesystem::create_directories(config.out_dir);
  const std::string metrics_path = files ? (std::filesystem::path(config.out_dir) / "metrics.csv").string() : "";
  const std::string ckpt_path = files ? (std::filesystem::path(config.out_dir) / "checkpoint.bin").string() : "";
  if (files) write_metrics(metrics_path, {}, start > 0 && std::filesystem::exists(metrics_path));

  LrSchedule schedule = LrSchedule::standard(config.lr, config.steps);
  if (config.halving_interval > 0) schedule.interval = config.halving_interval;
  const long stop = config.stop_at >= 0 ? std::min<long>(config.stop_at, config.steps) : config.steps;

  Eigen::VectorXd last_good = tr.tape.values();
  for (long step = start; step < stop; ++step) {
    const LossBreakdown lb = evaluate_step(tr, train, step);
    const Eigen::VectorXd& g = tr.tape.grads();
    if (!std::isfinite(lb.total) || !g.allFinite()) {
      result.diverged = true;
      Eigen::Index bad = 0;
      for (; bad < g.size() && std::isfinite(g(bad)); ++bad) {
      }
      result.diagnostic = !std::isfinite(lb.total) ? "loss is not finite at step " + std::to_string(step)
                                                   : "non-finite gradient for " + tr.tape.describe(bad) + " at step " +
                                                         std::to_string(step);
      tr.tape.values() = last_good;
      if (files) save_checkpoint(tr, state, ckpt_path);
      break;
    }
    last_good = tr.tape.values();
    const double lr = schedule.lr(step);
    adam_step(tr.tape, state, lr);
    result.final_loss = lb;
    result.steps_completed = step + 1;

    const bool last = step + 1 == stop;
    FitLogRow row;
    row.step = step;
    row.loss = lb;
    row.lr = lr;
    if (config.eval_every > 0 && (step + 1) % config.eval_every == 0 && !holdout.empty()) {
      Scene snap = scene;
      tr.commit(snap);
      const HoldoutMetrics m = evaluate_views(snap, holdout, config.threads);
      row.psnr_holdout = m.psnr;
      row.psnr_holdout_raw = m.psnr_raw;
    }
    if ((step + 1) % config.log_every == 0 || last || step == start || !std::isnan(row.psnr_holdout)) {
      result.log.push_back(row);
      // The final row is written once holdout metrics are known.
      if (files && !last) write_metrics(metrics_path, {row}, true);
    }
    if (files && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0) {
      save_checkpoint(tr, state, ckpt_path);
    }
  }
  if (files && !result.diverged) save_checkpoint(tr, state, ckpt_path);
  tr.commit(scene);

  if (!holdout.empty()) {
    const HoldoutMetrics m = evaluate_views(scene, holdout, config.threads);
    result.psnr_holdout = m.psnr;
    result.psnr_holdout_raw = m.psnr_raw;
    result.ssim_holdout = m.ssim;
    if (!result.log.empty() && result.steps_completed == stop) {
      result.log.back().psnr_holdout = m.psnr;
      result.log.back().psnr_holdout_raw = m.psnr_raw;
    }
  }
  if (files && !result.diverged && !result.log.empty() && result.log.back().step + 1 == stop) {
    write_metrics(metrics_path, {result.log.back()}, true);
  }
  if (files) save_scene(scene, (std::filesystem::path(config.out_dir) / "scene.json").string());
  return result;
}

}  // namespace facelight
