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

#include "facelight/rng.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace facelight {

namespace {

struct Moments {
  Eigen::VectorXd sum;
  Eigen::VectorXd sum_sq;
};

/// Runs `fn(sampler, rng, i, out)` for i in [0, n) over fixed-size shards and
/// reduces the shards in index order.
template <typename Fn>
McEstimate run_sharded(std::size_t n, std::uint64_t seed, int dims, bool stratified, int threads, Fn fn) {
  if (n == 0) throw DomainError("Monte-Carlo estimate needs at least one sample");
  const std::size_t shards = (n + kShardSize - 1) / kShardSize;
  std::vector<Moments> parts(shards);
  auto work = [&](std::size_t s) {
    const std::size_t begin = s * kShardSize;
    const std::size_t count = std::min(kShardSize, n - begin);
    Sampler2D sampler(CounterRng::derive(seed, 2 * s), count, stratified);
    CounterRng rng(CounterRng::derive(seed, 2 * s + 1));
    Moments m{Eigen::VectorXd::Zero(dims), Eigen::VectorXd::Zero(dims)};
    Eigen::VectorXd v(dims);
    for (std::size_t i = 0; i < count; ++i) {
      fn(sampler, rng, i, v);
      if (!v.allFinite()) throw DomainError("Monte-Carlo integrand is not finite");
      m.sum += v;
      m.sum_sq += v.cwiseAbs2();
    }
    parts[s] = std::move(m);
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(shards)));
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
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dims), sum_sq = Eigen::VectorXd::Zero(dims);
  for (const auto& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const double nn = static_cast<double>(n);
  McEstimate e;
  e.mean = sum / nn;
  const Eigen::VectorXd var = ((sum_sq / nn - e.mean.cwiseAbs2()) * (nn / std::max(nn - 1.0, 1.0))).cwiseMax(0.0);
  e.std_error = (var / nn).cwiseSqrt();
  e.n_samples = n;
  e.seed = seed;
  return e;
}

/// Directional density used for lobe sampling: cosine about n, or a vMF or
/// Phong lobe about the mirror direction.
struct Component {
  double weight;
  AnalyticBrdf::Kind kind;
  double param;
};

void collect_lobes(const AnalyticBrdf& b, double weight, std::vector<Component>& out) {
  switch (b.kind) {
    case AnalyticBrdf::Kind::Lambertian: out.push_back({weight, b.kind, 0.0}); break;
    case AnalyticBrdf::Kind::VmfLobe:
    case AnalyticBrdf::Kind::PhongLobe: out.push_back({weight, b.kind, b.param}); break;
    case AnalyticBrdf::Kind::LowRankCombo:
      for (std::size_t j = 0; j < b.components.size(); ++j) collect_lobes(b.components[j], weight * b.weights[j], out);
      break;
  }
}

class DirectionSampler {
 public:
  DirectionSampler(HemisphereSampling mode, const Vec3& n, const Vec3& mirror, std::vector<Component> lobes)
      : mode_(mode), n_frame_(n), r_frame_(mirror), n_(n), r_(mirror) {
    if (mode_ != HemisphereSampling::Lobe) return;
    // A defensive cosine share keeps the mixture density positive wherever
    // the integrand is.
    components_.push_back({0.1, AnalyticBrdf::Kind::Lambertian, 0.0});
    double total = 0.0;
    for (const auto& c : lobes) total += std::abs(c.weight);
    for (const auto& c : lobes) {
      if (total > 0.0 && c.weight != 0.0) components_.push_back({0.9 * std::abs(c.weight) / total, c.kind, c.param});
    }
    double norm = 0.0;
    for (const auto& c : components_) norm += c.weight;
    for (auto& c : components_) c.weight /= norm;
  }

  /// Draws a direction and returns its density (0 marks a wasted sample).
  double sample(const Eigen::Vector2d& u, CounterRng& rng, Vec3& omega) const {
    switch (mode_) {
      case HemisphereSampling::Uniform:
        omega = n_frame_.to_world(warp::uniform_hemisphere(u.x(), u.y()));
        return warp::kUniformHemispherePdf;
      case HemisphereSampling::Cosine: {
        const Vec3 local = warp::cosine_hemisphere(u.x(), u.y());
        omega = n_frame_.to_world(local);
        return warp::cosine_hemisphere_pdf(local.z());
      }
      case HemisphereSampling::Lobe: break;
    }
    double pick = rng.uniform();
    std::size_t c = 0;
    while (c + 1 < components_.size() && pick >= components_[c].weight) pick -= components_[c++].weight;
    const Component& chosen = components_[c];
    switch (chosen.kind) {
      case AnalyticBrdf::Kind::VmfLobe: omega = r_frame_.to_world(warp::vmf(u.x(), u.y(), chosen.param)); break;
      case AnalyticBrdf::Kind::PhongLobe: omega = r_frame_.to_world(warp::phong_lobe(u.x(), u.y(), chosen.param)); break;
      default: omega = n_frame_.to_world(warp::cosine_hemisphere(u.x(), u.y())); break;
    }
    omega.normalize();
    return pdf(omega);
  }

  double pdf(const Vec3& omega) const {
    double p = 0.0;
    for (const auto& c : components_) {
      switch (c.kind) {
        case AnalyticBrdf::Kind::VmfLobe:
          p += c.weight * c.param / (2.0 * kPi * -std::expm1(-2.0 * c.param)) * std::exp(c.param * (omega.dot(r_) - 1.0));
          break;
        case AnalyticBrdf::Kind::PhongLobe: p += c.weight * warp::phong_lobe_pdf(omega.dot(r_), c.param); break;
        default: p += c.weight * warp::cosine_hemisphere_pdf(omega.dot(n_)); break;
      }
    }
    return p;
  }

 private:
  HemisphereSampling mode_;
  Frame n_frame_;
  Frame r_frame_;
  Vec3 n_;
  Vec3 r_;
  std::vector<Component> components_;
};

/// Shared estimator for f(omega_i) L(omega_i) (omega_i . n)^+ with an RGB BRDF.
template <typename Brdf>
McEstimate render_eq(Brdf brdf, std::vector<Component> lobes, const Direction& n, const Direction& omega_o,
                     const SHLight& light, std::size_t n_samples, std::uint64_t seed, const McOptions& options) {
  const Vec3 nv = n.vec(), wo = omega_o.vec();
  const Vec3 mirror = reflect(omega_o, n).vec();
  const DirectionSampler sampler(options.sampling, nv, mirror, std::move(lobes));
  const int l_max = light.l_max();
  const Eigen::MatrixXd& coeffs = light.coeffs();
  return run_sharded(n_samples, seed, 3, options.stratified, options.threads,
                     [&](Sampler2D& s2, CounterRng& rng, std::size_t i, Eigen::VectorXd& out) {
                       Vec3 wi;
                       const double pdf = sampler.sample(s2(i), rng, wi);
                       const double cos = wi.dot(nv);
                       if (!(pdf > 0.0) || cos <= 0.0) {
                         out.setZero();
                         return;
                       }
                       Eigen::VectorXd y(sh_count(l_max));
                       sh_basis_into(wi.x(), wi.y(), wi.z(), l_max, y.data());
                       const Eigen::Vector3d radiance = coeffs * y;
                       const RGB f = brdf(wi, wo, nv);
                       out = (f * radiance.array() * (cos / pdf)).matrix();
                     });
}

}  // namespace

McEstimate mc_render_eq(const AnalyticBrdf& f, const Direction& n, const Direction& omega_o, const SHLight& light,
                        std::size_t n_samples, std::uint64_t seed, const McOptions& options) {
  std::vector<Component> lobes;
  collect_lobes(f, 1.0, lobes);
  return render_eq([&f](const Vec3& wi, const Vec3& wo, const Vec3& nv) { return RGB::Constant(f.eval(wi, wo, nv)); },
                   std::move(lobes), n, omega_o, light, n_samples, seed, options);
}

namespace {

McEstimate material_eq(const MaterialSample& m, const std::vector<AnalyticBrdf>& bases, bool diffuse,
                       const Direction& n, const Direction& omega_o, const SHLight& light, std::size_t n_samples,
                       std::uint64_t seed, const McOptions& options) {
  if (static_cast<std::size_t>(m.coeffs.size()) != bases.size()) {
    throw DomainError("mc_render_eq: material coefficients do not match basis count");
  }
  std::vector<Component> lobes;
  if (diffuse) lobes.push_back({m.albedo.mean(), AnalyticBrdf::Kind::Lambertian, 0.0});
  for (std::size_t j = 0; j < bases.size(); ++j) collect_lobes(bases[j], m.rho * m.coeffs(static_cast<Eigen::Index>(j)), lobes);
  auto brdf = [&](const Vec3& wi, const Vec3& wo, const Vec3& nv) {
    double spec = 0.0;
    for (std::size_t j = 0; j < bases.size(); ++j) spec += m.coeffs(static_cast<Eigen::Index>(j)) * bases[j].eval(wi, wo, nv);
    RGB f = RGB::Constant(m.rho * spec);
    if (diffuse) f += m.albedo / kPi;
    return f;
  };
  return render_eq(brdf, std::move(lobes), n, omega_o, light, n_samples, seed, options);
}

}  // namespace

McEstimate mc_render_eq(const MaterialSample& m, const std::vector<AnalyticBrdf>& bases, const Direction& n,
                        const Direction& omega_o, const SHLight& light, std::size_t n_samples, std::uint64_t seed,
                        const McOptions& options) {
  return material_eq(m, bases, true, n, omega_o, light, n_samples, seed, options);
}

McEstimate mc_specular(const MaterialSample& m, const std::vector<AnalyticBrdf>& bases, const Direction& n,
                       const Direction& omega_o, const SHLight& light, std::size_t n_samples, std::uint64_t seed,
                       const McOptions& options) {
  return material_eq(m, bases, false, n, omega_o, light, n_samples, seed, options);
}

McEstimate mc_vmf_expectation(int l, int m, const VmfLobe& lobe, std::size_t n_samples, std::uint64_t seed,
                              bool stratified) {
  if (l < 0 || l > kMaxShOrder || m < -l || m > l) throw DomainError("mc_vmf_expectation: invalid (l, m)");
  if (!(lobe.kappa > 0.0)) throw DomainError("mc_vmf_expectation: kappa must be positive");
  const Frame frame(lobe.axis.vec());
  const int index = sh_index(l, m);
  return run_sharded(n_samples, seed, 1, stratified, 1,
                     [&](Sampler2D& s2, CounterRng&, std::size_t i, Eigen::VectorXd& out) {
                       const Eigen::Vector2d u = s2(i);
                       const Vec3 w = frame.to_world(warp::vmf(u.x(), u.y(), lobe.kappa)).normalized();
                       Eigen::VectorXd y(sh_count(l));
                       sh_basis_into(w.x(), w.y(), w.z(), l, y.data());
                       out(0) = y(index);
                     });
}

McEstimate integrate_basis_mc(const AnalyticBrdf& b, double mu, std::size_t n_samples, std::uint64_t seed) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("integrate_basis_mc: mu outside [0, 1]");
  const Direction n(0.0, 0.0, 1.0);
  const Direction wo = Direction::from_unit(Vec3(std::sqrt(1.0 - mu * mu), 0.0, mu));
  McOptions options;
  options.sampling = HemisphereSampling::Lobe;
  McEstimate e = mc_render_eq(b, n, wo, SHLight::constant(RGB::Ones()), n_samples, seed, options);
  e.mean.conservativeResize(1);
  e.std_error.conservativeResize(1);
  return e;
}

MonotoneCubic integrate_basis_table(const AnalyticBrdf& b, const BasisTableOptions& options) {
  if (!b.isotropic()) throw DomainError("integrate_basis_table: anisotropic BRDF");
  if (options.nodes < 2) throw DomainError("integrate_basis_table: need at least two nodes");
  std::vector<double> values(static_cast<std::size_t>(options.nodes), 0.0);
  if (b.kind == AnalyticBrdf::Kind::LowRankCombo) {
    // Integration is linear, so combinations reuse their components' tables.
    for (std::size_t j = 0; j < b.components.size(); ++j) {
      BasisTableOptions sub = options;
      sub.seed = CounterRng::derive(options.seed, j);
      const MonotoneCubic t = integrate_basis_table(b.components[j], sub);
      for (std::size_t i = 0; i < values.size(); ++i) values[i] += b.weights[j] * t.values()[i];
    }
    return MonotoneCubic(0.0, 1.0, std::move(values));
  }
  for (int i = 0; i < options.nodes; ++i) {
    const double mu = static_cast<double>(i) / (options.nodes - 1);
    if (b.kind == AnalyticBrdf::Kind::Lambertian) {
      values[static_cast<std::size_t>(i)] = 1.0;
      continue;
    }
    values[static_cast<std::size_t>(i)] =
        std::max(0.0, integrate_basis_mc(b, mu, options.samples_per_node, CounterRng::derive(options.seed, i)).value());
  }
  return MonotoneCubic(0.0, 1.0, std::move(values));
}

AnalyticBasis make_analytic_basis(std::vector<AnalyticBrdf> sources, const BasisTableOptions& options) {
  AnalyticBasis basis;
  for (std::size_t j = 0; j < sources.size(); ++j) {
    BasisTableOptions o = options;
    o.seed = CounterRng::derive(options.seed, 1000 + j);
    basis.tables.push_back(integrate_basis_table(sources[j], o));
  }
  basis.sources = std::move(sources);
  basis.options = options;
  return basis;
}

double phong_attenuation(int l, double exponent) {
  if (l < 0) throw DomainError("phong_attenuation: negative band");
  if (!(exponent > 0.0)) throw DomainError("phong_attenuation: exponent must be positive");
  // I_l = integral_0^1 t^e P_l(t) dt satisfies I_l = (e - l + 2) / (e + l + 1) I_{l-2}
  // with I_0 = 1 / (e + 1) and I_1 = 1 / (e + 2); A_l = (e + 1) I_l.
  double a = l % 2 == 0 ? 1.0 : (exponent + 1.0) / (exponent + 2.0);
  for (int j = 2 + l % 2; j <= l; j += 2) a *= (exponent - j + 2.0) / (exponent + j + 1.0);
  return a;
}

RGB phong_specular(const Direction& n, const Direction& omega_o, double exponent, const SHLight& light) {
  const Direction r = reflect(omega_o, n);
  const Eigen::VectorXd y = eval_sh_basis(r, light.l_max());
  Eigen::VectorXd a(y.size());
  for (int l = 0; l <= light.l_max(); ++l) {
    const double al = phong_attenuation(l, exponent);
    for (int m = -l; m <= l; ++m) a(sh_index(l, m)) = al;
  }
  const Eigen::Vector3d out = light.coeffs() * y.cwiseProduct(a);
  return out.array().max(0.0);
}

Image oracle_render(const Scene& scene, const Camera& camera, const OracleRenderOptions& options) {
  const auto* basis = std::get_if<AnalyticBasis>(&scene.basis);
  if (!basis) throw DomainError("oracle_render: the scene basis must be analytic");
  if (options.samples == 0) throw DomainError("oracle_render: need at least one sample per pixel");
  camera.validate();
  // FNV-1a of the camera id keeps streams distinct across views.
  std::uint64_t id_hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : camera.id) id_hash = (id_hash ^ ch) * 0x100000001b3ULL;
  const std::uint64_t view_seed = CounterRng::derive(options.seed, id_hash);
  McOptions mc;
  mc.sampling = HemisphereSampling::Lobe;

  Image img(camera.width, camera.height);
  auto render_row = [&](int y) {
    for (int x = 0; x < camera.width; ++x) {
      const Ray ray = camera.generate_ray(x + 0.5, y + 0.5);
      const TraceResult tr = sphere_trace(scene.geometry, scene.params, ray, scene.settings.trace);
      if (!tr.hit()) continue;
      const Vec3 p = ray.at(tr.t0);
      const Direction n = sdf_normal(scene.geometry, scene.params, p);
      const Direction wo = -ray.dir;
      if (wo.dot(n) <= 0.0) continue;
      const MaterialSample m = eval_material(scene.material, scene.params, p, scene.geometry.omega);
      const McEstimate e = mc_render_eq(m, basis->sources, n, wo, scene.light, options.samples,
                                        CounterRng::derive(view_seed, static_cast<std::uint64_t>(img.index(x, y))), mc);
      img.set(x, y, e.rgb());
    }
  };
  const int threads = std::max(1, std::min(options.threads, camera.height));
  if (threads == 1) {
    for (int y = 0; y < camera.height; ++y) render_row(y);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int y = next++; y < camera.height; y = next++) render_row(y);
      });
    }
    for (auto& th : pool) th.join();
  }
  return img;
}

}  // namespace facelight
