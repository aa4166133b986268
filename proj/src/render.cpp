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

#include "facelight/render.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace facelight {

void Camera::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw DomainError("camera '" + id + "': focal length must be positive");
  if (width <= 0 || height <= 0) throw DomainError("camera '" + id + "': resolution must be positive");
  const double err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-9) || rotation.determinant() < 0.0) throw DomainError("camera '" + id + "': rotation is not orthonormal");
  if (!position.allFinite()) throw DomainError("camera '" + id + "': non-finite position");
}

Ray Camera::generate_ray(double px, double py) const {
  const Vec3 local((px - cx) / fx, (py - cy) / fy, 1.0);
  return {position, Direction(rotation * local)};
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y, int width, int height) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = z.cross(up).normalized();
  const Vec3 y = z.cross(x);
  Camera c;
  c.rotation.col(0) = x;
  c.rotation.col(1) = y;
  c.rotation.col(2) = z;
  c.position = eye;
  c.width = width;
  c.height = height;
  c.fy = 0.5 * height / std::tan(0.5 * fov_y);
  c.fx = c.fy;
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  return c;
}

std::string to_string(TraceResult::Status s) {
  switch (s) {
    case TraceResult::Status::Hit: return "hit";
    case TraceResult::Status::MissedOmega: return "missed_omega";
    case TraceResult::Status::ExitedOmega: return "exited_omega";
    case TraceResult::Status::EnteredNegative: return "entered_negative";
    case TraceResult::Status::IterationCap: return "iteration_cap";
  }
  return "unknown";
}

bool intersect_sphere(const Ray& ray, const BoundingSphere& s, double* t_enter, double* t_exit) {
  const Vec3 oc = ray.origin - s.center;
  const double b = oc.dot(ray.dir.vec());
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc <= 0.0) return false;
  const double root = std::sqrt(disc);
  const double t1 = -b + root;
  if (t1 <= 0.0) return false;
  *t_enter = std::max(-b - root, 0.0);
  *t_exit = t1;
  return true;
}

TraceResult sphere_trace(const SdfField& g, const ParamTape& tape, const Ray& ray, const TraceSettings& settings,
                         std::vector<double>* trajectory) {
  TraceResult r;
  double t_enter, t_exit;
  if (!intersect_sphere(ray, g.omega, &t_enter, &t_exit)) return r;
  r.t_enter = t_enter;
  r.t_exit = t_exit;
  const double thr = settings.hit_threshold;
  const double step = settings.step_factor * tracing_scale(g.prior);
  auto record = [&](double t) {
    if (trajectory) trajectory->push_back(t);
  };
  auto finish = [&](TraceResult::Status status, double t, double d) {
    r.status = status;
    r.t0 = t;
    r.sdf = d;
    return r;
  };
  // Secant steps from an accepted hit toward the zero crossing, kept while
  // |sdf| shrinks. Grazing rays otherwise stop up to several mm short of it.
  auto polish = [&](double t, double d, double t_other, double d_other) {
    for (int k = 0; k < 8 && r.iterations < settings.max_iterations && std::abs(d) > 1e-4 * thr; ++k) {
      if (d == d_other) break;
      const double tn = t - d * (t - t_other) / (d - d_other);
      if (!std::isfinite(tn) || std::abs(tn - t) > 100.0 * thr || tn < t_enter || tn > t_exit) {
        break;
      }
      const double dn = sdf_eval_truncated(g, tape, ray.at(tn));
      ++r.iterations;
      if (!(std::abs(dn) < std::abs(d))) break;
      t_other = t;
      d_other = d;
      t = tn;
      d = dn;
    }
    return finish(TraceResult::Status::Hit, t, d);
  };

  double t = t_enter;
  double t_prev = t, d_prev = 0.0;
  int& it = r.iterations;
  while (it < settings.max_iterations) {
    const double d = sdf_eval_truncated(g, tape, ray.at(t));
    ++it;
    // Overshoots are not accepted positions.
    if (d > -thr) record(t);
    if (std::abs(d) < thr) return it == 1 ? finish(TraceResult::Status::Hit, t, d) : polish(t, d, t_prev, d_prev);
    if (d < 0.0) {
      if (it == 1) return finish(TraceResult::Status::EnteredNegative, t, d);
      // Overshoot: false position (Illinois variant) inside [t_prev, t].
      double lo = t_prev, dlo = d_prev, hi = t, dhi = d;
      int side = 0;
      while (it < settings.max_iterations) {
        double tm = lo + (hi - lo) * dlo / (dlo - dhi);
        if (!(tm > lo && tm < hi)) tm = 0.5 * (lo + hi);
        const double dm = sdf_eval_truncated(g, tape, ray.at(tm));
        ++it;
        if (std::abs(dm) < thr) {
          record(tm);
          return dm > 0.0 ? polish(tm, dm, hi, dhi) : polish(tm, dm, lo, dlo);
        }
        if (dm > 0.0) {
          lo = tm;
          dlo = dm;
          record(lo);
          if (side == 1) dhi *= 0.5;
          side = 1;
        } else {
          hi = tm;
          dhi = dm;
          if (side == -1) dlo *= 0.5;
          side = -1;
        }
      }
      return finish(TraceResult::Status::IterationCap, lo, dlo);
    }
    t_prev = t;
    d_prev = d;
    t += step * d;
    if (t > t_exit) return finish(TraceResult::Status::ExitedOmega, t_exit, d);
  }
  return finish(TraceResult::Status::IterationCap, t, d_prev);
}

std::vector<double> sample_window(double t0, int count, double half_width) {
  if (count < 2) throw DomainError("sample_window: need at least two samples");
  std::vector<double> t(static_cast<std::size_t>(count));
  const double a = t0 - half_width;
  const double span = 2.0 * half_width;
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = a + span * i / (count - 1);
  return t;
}

double laplace_density(double sdf, double beta) {
  if (!(beta > 0.0)) throw DomainError("laplace_density: beta must be positive");
  const double psi = sdf >= 0.0 ? 0.5 * std::exp(-sdf / beta) : 1.0 - 0.5 * std::exp(sdf / beta);
  return psi / beta;
}

Eigen::ArrayXd volume_weights(const Eigen::ArrayXd& sigma, const Eigen::ArrayXd& dt) {
  if (sigma.size() != dt.size()) throw DomainError("volume_weights: size mismatch");
  Eigen::ArrayXd w(sigma.size());
  double optical = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double tau = sigma(i) * dt(i);
    w(i) = std::exp(-optical) * -std::expm1(-tau);
    optical += tau;
  }
  return w;
}

namespace {

void append_samples(const TraceResult& trace, const RenderSettings& s, std::vector<double>& t, std::vector<double>& dt) {
  if (trace.hit()) {
    t = sample_window(trace.t0, s.window_samples, s.window_half_width);
    dt.assign(t.size(), 2.0 * s.window_half_width / (s.window_samples - 1));
  } else if (trace.in_omega()) {
    const double len = (trace.t_exit - trace.t_enter) / s.unhit_samples;
    for (int i = 0; i < s.unhit_samples; ++i) t.push_back(trace.t_enter + (i + 0.5) * len);
    dt.assign(t.size(), len);
  }
}

}  // namespace

RaySampleSet make_sample_set(const SdfField& g, const ParamTape& tape, const Ray& ray, const TraceResult& trace,
                             double beta, const RenderSettings& settings) {
  RaySampleSet s;
  s.hit = trace.hit();
  s.t0 = trace.t0;
  append_samples(trace, settings, s.t, s.dt);
  s.sigma.resize(static_cast<Eigen::Index>(s.t.size()));
  for (std::size_t i = 0; i < s.t.size(); ++i) s.sigma(static_cast<Eigen::Index>(i)) = laplace_density(sdf_eval(g, tape, ray.at(s.t[i])), beta);
  s.weights = volume_weights(s.sigma, Eigen::Map<const Eigen::ArrayXd>(s.dt.data(), static_cast<Eigen::Index>(s.dt.size())));
  return s;
}

RGB volume_integrate(const RaySampleSet& samples, const Eigen::Array3Xd& radiances) {
  if (radiances.cols() != samples.weights.size()) throw DomainError("volume_integrate: radiances not aligned with samples");
  return (radiances.rowwise() * samples.weights.transpose()).rowwise().sum();
}

ShadeNodes shade_points(ad::Graph& g, const ShadingModel& model, const Eigen::Array3Xd& x,
                        const Eigen::Array3Xd& omega_o, const ad::Node& normals, const ad::Node& light, int l_max) {
  const int k = sh_count(l_max);
  if (light.rows() != 3 || light.cols() != k) throw DomainError("shade_points: light must be 3 x (l_max+1)^2");
  if (coeff_count(*model.material) != basis_count(*model.basis)) {
    throw DomainError("shade_points: material coefficient count differs from basis count");
  }
  const MaterialNodes mat = eval_material(g, *model.material, *model.tape, g.constant(ad::Array(x)));
  const ad::Node wo = g.constant(ad::Array(omega_o));
  const ad::Node mu = ad::dot3(wo, normals);

  ad::Array lambda(1, k), band(k, 1);
  for (int i = 0; i < k; ++i) {
    const int l = sh_band(i);
    lambda(0, i) = lambda_coeff(l);
    band(i, 0) = -0.5 * l * (l + 1);
  }
  const ad::Node irradiance = ad::relu(ad::matmul(light * g.constant(std::move(lambda)), ad::sh_basis(normals, l_max)));

  ShadeNodes out;
  out.diffuse = mat.albedo * irradiance * (1.0 / kPi);

  const ad::Node wr = 2.0 * mu * normals - wo;
  const ad::Node attenuation = ad::exp(ad::matmul(g.constant(std::move(band)), mat.inv_kappa));
  const ad::Node prefiltered = ad::relu(ad::matmul(light, ad::sh_basis(wr, l_max) * attenuation));
  const ad::Node basis = eval_integrated_basis(g, *model.basis, *model.tape, wo, normals, mu);
  const ad::Node material = ad::relu(ad::sum_rows(mat.coeffs * basis));
  out.specular = mat.rho * material * ad::step(mu) * prefiltered;
  out.radiance = out.diffuse + out.specular;
  return out;
}

RGB shade(const Vec3& x, const Direction& omega_o, const SdfField& geom, const MaterialField& field,
          const IntegratedBasisFn& basis, const SHLight& light, const ParamTape& tape, RGB* diffuse, RGB* specular) {
  ad::Graph g(false);
  const Eigen::Array3Xd xs(x.array());
  const SdfNodes sdf = sdf_eval(g, geom, tape, xs, true);
  if (!(sdf.gradient.value().matrix().norm() > 1e-8)) throw DomainError("shade: degenerate SDF gradient");
  const ad::Node n = sdf.gradient / ad::norm(sdf.gradient);
  const ShadingModel model{&geom, &field, &basis, &tape};
  const ShadeNodes s = shade_points(g, model, xs, Eigen::Array3Xd(omega_o.vec().array()), n,
                                    g.constant(ad::Array(light.coeffs().array())), light.l_max());
  if (diffuse) *diffuse = s.diffuse.value().col(0);
  if (specular) *specular = s.specular.value().col(0);
  return s.radiance.value().col(0);
}

RGB shade(const Vec3& x, const Direction& omega_o, const SdfField& g, const MaterialField& field,
          const IntegratedBasisFn& basis, const SHLight& light, const ParamTape& tape) {
  return shade(x, omega_o, g, field, basis, light, tape, nullptr, nullptr);
}

RayBatch plan_rays(const SdfField& g, const ParamTape& tape, const std::vector<Ray>& rays,
                   const RenderSettings& settings) {
  RayBatch b;
  b.traces.reserve(rays.size());
  b.offsets.reserve(rays.size() + 1);
  b.offsets.push_back(0);
  std::vector<double> ts, dts, t, dt;
  std::vector<std::size_t> owner;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    b.traces.push_back(sphere_trace(g, tape, rays[r], settings.trace));
    t.clear();
    dt.clear();
    append_samples(b.traces.back(), settings, t, dt);
    ts.insert(ts.end(), t.begin(), t.end());
    dts.insert(dts.end(), dt.begin(), dt.end());
    owner.insert(owner.end(), t.size(), r);
    b.offsets.push_back(static_cast<Eigen::Index>(ts.size()));
  }
  const auto n = static_cast<Eigen::Index>(ts.size());
  b.positions.resize(3, n);
  b.omega_o.resize(3, n);
  b.dt = Eigen::Map<const Eigen::ArrayXd>(dts.data(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Ray& ray = rays[owner[static_cast<std::size_t>(i)]];
    b.positions.col(i) = ray.at(ts[static_cast<std::size_t>(i)]).array();
    b.omega_o.col(i) = -ray.dir.vec().array();
  }
  return b;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

static RayRender render_rays_timed(ad::Graph& g, const ShadingModel& model, const RayBatch& batch, const ad::Node& light,
                            int l_max, const ad::Node& beta, double* shade_seconds, double* integrate_seconds) {
  const auto rays = static_cast<Eigen::Index>(batch.traces.size());
  RayRender out;
  if (batch.positions.cols() == 0) {
    out.rgb = g.constant(ad::Array::Zero(3, rays));
    out.specular = g.constant(ad::Array::Zero(3, rays));
    out.weight_sum = g.constant(ad::Array::Zero(1, rays));
    out.sdf_gradient = g.constant(ad::Array::Zero(3, 0));
    return out;
  }
  const auto t0 = Clock::now();
  const SdfNodes sdf = sdf_eval(g, *model.geometry, *model.tape, batch.positions, true);
  const ad::Node normals = sdf.gradient / ad::norm(sdf.gradient, 1e-12);
  const ShadeNodes s = shade_points(g, model, batch.positions, batch.omega_o, normals, light, l_max);
  const auto t1 = Clock::now();
  const ad::Node sigma = ad::laplace_density(sdf.value, beta);
  const ad::Node tau = sigma * g.constant(ad::Array(batch.dt.transpose()));
  const ad::Node transmittance = ad::exp(-ad::segment_exclusive_cumsum(tau, batch.offsets));
  const ad::Node w = transmittance * (1.0 - ad::exp(-tau));
  out.rgb = ad::segment_sum(s.radiance * w, batch.offsets);
  out.specular = ad::segment_sum(s.specular * w, batch.offsets);
  out.weight_sum = ad::segment_sum(w, batch.offsets);
  out.sdf_gradient = sdf.gradient;
  if (shade_seconds) *shade_seconds += std::chrono::duration<double>(t1 - t0).count();
  if (integrate_seconds) *integrate_seconds += seconds_since(t1);
  return out;
}

RayRender render_rays(ad::Graph& g, const ShadingModel& model, const RayBatch& batch, const ad::Node& light,
                      int l_max, const ad::Node& beta) {
  return render_rays_timed(g, model, batch, light, l_max, beta, nullptr, nullptr);
}

const Camera& Scene::camera(const std::string& id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return c;
  }
  throw DomainError("scene has no camera '" + id + "'");
}

Image render_image(const Scene& scene, const Camera& camera, const RenderOptions& options, RenderStats* stats) {
  camera.validate();
  if (!(scene.beta > 0.0)) throw DomainError("render_image: beta must be positive");
  const int ts = std::max(1, scene.settings.tile_size);
  const int tiles_x = (camera.width + ts - 1) / ts;
  const int tiles_y = (camera.height + ts - 1) / ts;
  const int tiles = tiles_x * tiles_y;
  const int threads = std::max(1, std::min(options.threads, tiles));

  Image img(camera.width, camera.height);
  std::vector<RenderStats> local(static_cast<std::size_t>(threads));
  const ShadingModel model = scene.model();
  const ad::Array light_coeffs = scene.light.coeffs().array();

  auto render_tile = [&](int tile, RenderStats& st) {
    const int x0 = (tile % tiles_x) * ts, y0 = (tile / tiles_x) * ts;
    const int x1 = std::min(x0 + ts, camera.width), y1 = std::min(y0 + ts, camera.height);
    std::vector<Ray> rays;
    std::vector<Eigen::Index> pixels;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        rays.push_back(camera.generate_ray(x + 0.5, y + 0.5));
        pixels.push_back(img.index(x, y));
      }
    }
    const auto t0 = Clock::now();
    const RayBatch batch = plan_rays(scene.geometry, scene.params, rays, scene.settings);
    st.trace_seconds += seconds_since(t0);
    ad::Graph g(false);
    const RayRender rr = render_rays_timed(g, model, batch, g.constant(light_coeffs), scene.light.l_max(),
                                           g.constant(scene.beta), &st.shade_seconds, &st.integrate_seconds);
    for (std::size_t i = 0; i < rays.size(); ++i) {
      img.pixels.col(pixels[i]) = rr.rgb.value().col(static_cast<Eigen::Index>(i));
      const auto& tr = batch.traces[i];
      ++st.rays;
      if (tr.hit()) ++st.hits;
      if (tr.status == TraceResult::Status::IterationCap) st.cap_pixels.push_back(static_cast<std::size_t>(pixels[i]));
    }
  };

  if (threads == 1) {
    for (int t = 0; t < tiles; ++t) render_tile(t, local[0]);
  } else {
    // Tiles are independent and always batched identically, so either
    // schedule yields the same pixels; deterministic mode also fixes the
    // assignment so per-thread diagnostics come out in a stable order.
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        if (options.deterministic) {
          for (int t = w; t < tiles; t += threads) render_tile(t, local[static_cast<std::size_t>(w)]);
        } else {
          for (int t = next++; t < tiles; t = next++) render_tile(t, local[static_cast<std::size_t>(w)]);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  if (stats) {
    *stats = RenderStats{};
    for (const auto& st : local) {
      stats->trace_seconds += st.trace_seconds;
      stats->shade_seconds += st.shade_seconds;
      stats->integrate_seconds += st.integrate_seconds;
      stats->rays += st.rays;
      stats->hits += st.hits;
      stats->cap_pixels.insert(stats->cap_pixels.end(), st.cap_pixels.begin(), st.cap_pixels.end());
    }
    std::sort(stats->cap_pixels.begin(), stats->cap_pixels.end());
  }
  return img;
}

}  // namespace facelight
