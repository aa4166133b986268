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

#include "facelight/scene.hpp"

#include "facelight/blob.hpp"
#include "facelight/oracle.hpp"
#include "facelight/rng.hpp"

#include <filesystem>
#include <fstream>

namespace facelight {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw SchemaError(where + ": " + what); }

const json& req(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

double num(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double num(const json& obj, const char* key, const std::string& where) {
  return num(req(obj, key, where), where + "." + key);
}

double num_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? num(obj, key, where) : fallback;
}

int int_or(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string str(const json& obj, const char* key, const std::string& where) {
  const json& v = req(obj, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

Eigen::VectorXd vec(const json& v, const std::string& where, Eigen::Index size = -1) {
  if (!v.is_array()) fail(where, "expected an array");
  if (size >= 0 && static_cast<Eigen::Index>(v.size()) != size) fail(where, "expected " + std::to_string(size) + " entries");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = num(v[i], where);
  return out;
}

Vec3 vec3(const json& obj, const char* key, const std::string& where) {
  return vec(req(obj, key, where), where + "." + key, 3);
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }
json to_json(const RGB& v) { return json::array({v(0), v(1), v(2)}); }

std::vector<int> widths(const json& obj, const std::string& where) {
  const json& w = req(obj, "widths", where);
  if (!w.is_array() || w.size() < 2) fail(where + ".widths", "expected at least two layer widths");
  std::vector<int> out;
  for (const auto& v : w) {
    if (!v.is_number_integer() || v.get<int>() <= 0) fail(where + ".widths", "widths must be positive integers");
    out.push_back(v.get<int>());
  }
  return out;
}

ActivationSpec activation(const json& obj, const std::string& where, ActivationSpec fallback) {
  ActivationSpec a = fallback;
  if (obj.contains("activation")) {
    try {
      a.kind = activation_from_string(str(obj, "activation", where));
    } catch (const DomainError& e) {
      fail(where, e.what());
    }
  }
  a.param = num_or(obj, "param", a.param, where);
  return a;
}

json mlp_json(const Mlp& m) {
  return {{"widths", m.widths()}, {"activation", to_string(m.hidden().kind)}, {"param", m.hidden().param}};
}

// --- material ---------------------------------------------------------------

MaterialSample sample_from_json(const json& o, const std::string& where, bool strict) {
  check_keys(o, {"albedo", "rho", "kappa", "coeffs"}, where, strict);
  MaterialSample m;
  m.albedo = vec(req(o, "albedo", where), where + ".albedo", 3).array();
  m.rho = num(o, "rho", where);
  m.kappa = num(o, "kappa", where);
  m.coeffs = vec(req(o, "coeffs", where), where + ".coeffs");
  try {
    m.validate();
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  return m;
}

json sample_to_json(const MaterialSample& m) {
  return {{"albedo", to_json(m.albedo)}, {"rho", m.rho}, {"kappa", m.kappa}, {"coeffs", to_json(m.coeffs)}};
}

AnalyticBrdf brdf_from_json(const json& o, const std::string& where, bool strict) {
  const std::string kind = str(o, "kind", where);
  try {
    switch (brdf_kind_from_string(kind)) {
      case AnalyticBrdf::Kind::Lambertian:
        check_keys(o, {"kind"}, where, strict);
        return AnalyticBrdf::lambertian();
      case AnalyticBrdf::Kind::VmfLobe:
        check_keys(o, {"kind", "kappa"}, where, strict);
        return AnalyticBrdf::vmf_lobe(num(o, "kappa", where));
      case AnalyticBrdf::Kind::PhongLobe:
        check_keys(o, {"kind", "exponent"}, where, strict);
        return AnalyticBrdf::phong_lobe(num(o, "exponent", where));
      case AnalyticBrdf::Kind::LowRankCombo: {
        check_keys(o, {"kind", "weights", "components"}, where, strict);
        const Eigen::VectorXd w = vec(req(o, "weights", where), where + ".weights");
        const json& comps = req(o, "components", where);
        if (!comps.is_array()) fail(where + ".components", "expected an array");
        std::vector<AnalyticBrdf> parts;
        for (std::size_t i = 0; i < comps.size(); ++i) {
          parts.push_back(brdf_from_json(comps[i], where + ".components[" + std::to_string(i) + "]", strict));
        }
        return AnalyticBrdf::low_rank_combo(std::vector<double>(w.data(), w.data() + w.size()), std::move(parts));
      }
    }
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  fail(where, "unknown BRDF kind");
}

json brdf_to_json(const AnalyticBrdf& b) {
  json o{{"kind", to_string(b.kind)}};
  switch (b.kind) {
    case AnalyticBrdf::Kind::Lambertian: break;
    case AnalyticBrdf::Kind::VmfLobe: o["kappa"] = b.param; break;
    case AnalyticBrdf::Kind::PhongLobe: o["exponent"] = b.param; break;
    case AnalyticBrdf::Kind::LowRankCombo: {
      o["weights"] = b.weights;
      json comps = json::array();
      for (const auto& c : b.components) comps.push_back(brdf_to_json(c));
      o["components"] = comps;
      break;
    }
  }
  return o;
}

MaterialField material_from_json(const json& o, Scene& scene, bool strict) {
  const std::string where = "material";
  const std::string type = str(o, "type", where);
  if (type == "constant") {
    check_keys(o, {"type", "albedo", "rho", "kappa", "coeffs"}, where, strict);
    json v = o;
    v.erase("type");
    return ConstantField{sample_from_json(v, where, strict)};
  }
  if (type == "linear_ramp") {
    check_keys(o, {"type", "axis", "lo", "hi", "from", "to"}, where, strict);
    LinearRampField f;
    f.axis = vec3(o, "axis", where);
    f.lo = num(o, "lo", where);
    f.hi = num(o, "hi", where);
    f.from = sample_from_json(req(o, "from", where), where + ".from", strict);
    f.to = sample_from_json(req(o, "to", where), where + ".to", strict);
    if (f.from.coeffs.size() != f.to.coeffs.size()) fail(where, "ramp endpoints need equal coefficient counts");
    if (!(f.hi > f.lo)) fail(where, "hi must exceed lo");
    return f;
  }
  if (type == "two_lobe") {
    check_keys(o, {"type", "albedo", "rho", "kappa", "center", "axis", "width"}, where, strict);
    TwoLobeField f;
    f.albedo = vec(req(o, "albedo", where), where + ".albedo", 3).array();
    f.rho = num(o, "rho", where);
    f.kappa = num(o, "kappa", where);
    f.center = vec3(o, "center", where);
    f.axis = vec3(o, "axis", where);
    f.width = num(o, "width", where);
    if (!(f.width > 0.0) || !(f.kappa > 0.0)) fail(where, "width and kappa must be positive");
    return f;
  }
  if (type == "network") {
    check_keys(o, {"type", "widths", "activation", "param", "k"}, where, strict);
    NetworkField f;
    f.k = int_or(o, "k", kDefaultBasisCount, where);
    const std::vector<int> w = widths(o, where);
    if (w.front() != 3 || w.back() != 5 + f.k) fail(where, "network widths must run from 3 to 5 + k");
    f.mlp = Mlp(scene.params, "material", w, activation(o, where, {Activation::Sine, 30.0}));
    f.frame = scene.geometry.omega;
    return f;
  }
  fail(where, "unknown material type '" + type + "'");
}

json material_to_json(const MaterialField& field) {
  if (const auto* c = std::get_if<ConstantField>(&field)) {
    json o = sample_to_json(c->value);
    o["type"] = "constant";
    return o;
  }
  if (const auto* r = std::get_if<LinearRampField>(&field)) {
    return {{"type", "linear_ramp"}, {"axis", to_json(r->axis)}, {"lo", r->lo}, {"hi", r->hi},
            {"from", sample_to_json(r->from)}, {"to", sample_to_json(r->to)}};
  }
  if (const auto* t = std::get_if<TwoLobeField>(&field)) {
    return {{"type", "two_lobe"}, {"albedo", to_json(t->albedo)}, {"rho", t->rho}, {"kappa", t->kappa},
            {"center", to_json(t->center)}, {"axis", to_json(t->axis)}, {"width", t->width}};
  }
  const auto& n = std::get<NetworkField>(field);
  json o = mlp_json(n.mlp);
  o["type"] = "network";
  o["k"] = n.k;
  return o;
}

// --- geometry ---------------------------------------------------------------

SdfPrior prior_from_json(const json& g, bool strict) {
  const std::string where = "geometry.prior";
  const json& o = req(g, "prior", "geometry");
  const std::string type = str(o, "type", where);
  SdfPrior p;
  if (type == "sphere") {
    check_keys(o, {"type", "center", "radius"}, where, strict);
    SpherePrior s{vec3(o, "center", where), num(o, "radius", where)};
    if (!(s.radius > 0.0)) fail(where, "radius must be positive");
    p.shape = s;
  } else if (type == "ellipsoid") {
    check_keys(o, {"type", "center", "radii"}, where, strict);
    EllipsoidPrior e{vec3(o, "center", where), vec3(o, "radii", where)};
    if (!(e.radii.minCoeff() > 0.0)) fail(where, "radii must be positive");
    p.shape = e;
  } else if (type == "blobs") {
    check_keys(o, {"type", "centers", "radii", "blend"}, where, strict);
    BlobSetPrior b;
    const json& cs = req(o, "centers", where);
    if (!cs.is_array() || cs.empty()) fail(where + ".centers", "expected a non-empty array");
    for (const auto& c : cs) b.centers.push_back(vec(c, where + ".centers", 3));
    const Eigen::VectorXd r = vec(req(o, "radii", where), where + ".radii", static_cast<Eigen::Index>(b.centers.size()));
    b.radii.assign(r.data(), r.data() + r.size());
    b.blend = num_or(o, "blend", 10.0, where);
    if (!(b.blend > 0.0) || !(r.minCoeff() > 0.0)) fail(where, "radii and blend must be positive");
    p.shape = b;
  } else {
    fail(where, "unknown prior type '" + type + "'");
  }
  if (g.contains("open_back")) {
    if (!g.at("open_back").is_boolean()) fail("geometry.open_back", "expected a boolean");
    p.open_back = g.at("open_back").get<bool>();
  }
  if (g.contains("back_axis")) p.back_axis = Vec3(vec3(g, "back_axis", "geometry")).normalized();
  if (g.contains("back_origin")) p.back_origin = vec3(g, "back_origin", "geometry");
  return p;
}

json prior_to_json(const SdfPrior& p) {
  json o;
  if (const auto* s = std::get_if<SpherePrior>(&p.shape)) {
    o = {{"type", "sphere"}, {"center", to_json(s->center)}, {"radius", s->radius}};
  } else if (const auto* e = std::get_if<EllipsoidPrior>(&p.shape)) {
    o = {{"type", "ellipsoid"}, {"center", to_json(e->center)}, {"radii", to_json(e->radii)}};
  } else {
    const auto& b = std::get<BlobSetPrior>(p.shape);
    json cs = json::array();
    for (const auto& c : b.centers) cs.push_back(to_json(c));
    o = {{"type", "blobs"}, {"centers", cs}, {"radii", b.radii}, {"blend", b.blend}};
  }
  return o;
}

Displacement displacement_from_json(const json& g, Scene& scene, bool strict) {
  if (!g.contains("displacement")) return NoDisplacement{};
  const std::string where = "geometry.displacement";
  const json& o = g.at("displacement");
  const std::string type = str(o, "type", where);
  if (type == "none") {
    check_keys(o, {"type"}, where, strict);
    return NoDisplacement{};
  }
  if (type == "constant") {
    check_keys(o, {"type", "value"}, where, strict);
    return ConstantDisplacement{num(o, "value", where)};
  }
  if (type == "network") {
    check_keys(o, {"type", "widths", "activation", "param", "bands", "scale"}, where, strict);
    NetworkDisplacement d;
    d.bands = int_or(o, "bands", 6, where);
    d.scale = num_or(o, "scale", 1.0, where);
    const std::vector<int> w = widths(o, where);
    if (w.front() != 3 + 6 * d.bands || w.back() != 1) fail(where, "network widths must run from 3 + 6 bands to 1");
    d.mlp = Mlp(scene.params, "displacement", w, activation(o, where, {Activation::Softplus, 100.0}));
    d.frame = scene.geometry.omega;
    return d;
  }
  fail(where, "unknown displacement type '" + type + "'");
}

json displacement_to_json(const Displacement& d) {
  if (const auto* c = std::get_if<ConstantDisplacement>(&d)) return {{"type", "constant"}, {"value", c->value}};
  if (const auto* n = std::get_if<NetworkDisplacement>(&d)) {
    json o = mlp_json(n->mlp);
    o["type"] = "network";
    o["bands"] = n->bands;
    o["scale"] = n->scale;
    return o;
  }
  return {{"type", "none"}};
}

// --- basis --------------------------------------------------------------------

IntegratedBasisFn basis_from_json(const json& o, Scene& scene, bool strict) {
  const std::string where = "basis";
  const std::string type = str(o, "type", where);
  if (type == "analytic") {
    check_keys(o, {"type", "brdfs", "nodes", "samples_per_node", "seed"}, where, strict);
    const json& list = req(o, "brdfs", where);
    if (!list.is_array() || list.empty()) fail(where + ".brdfs", "expected a non-empty array");
    std::vector<AnalyticBrdf> brdfs;
    for (std::size_t i = 0; i < list.size(); ++i) {
      brdfs.push_back(brdf_from_json(list[i], where + ".brdfs[" + std::to_string(i) + "]", strict));
    }
    BasisTableOptions opt;
    opt.nodes = int_or(o, "nodes", opt.nodes, where);
    opt.samples_per_node = static_cast<std::size_t>(num_or(o, "samples_per_node", static_cast<double>(opt.samples_per_node), where));
    if (o.contains("seed")) opt.seed = req(o, "seed", where).get<std::uint64_t>();
    if (opt.nodes < 2 || opt.samples_per_node < 1) fail(where, "need at least two nodes and one sample");
    return make_analytic_basis(std::move(brdfs), opt);
  }
  if (type == "network") {
    check_keys(o, {"type", "widths", "activation", "param"}, where, strict);
    const std::vector<int> w = widths(o, where);
    if (w.front() != 7) fail(where, "basis network takes 7 inputs");
    return NetworkBasis{Mlp(scene.params, "basis", w, activation(o, where, {Activation::Softplus, 1.0}))};
  }
  fail(where, "unknown basis type '" + type + "'");
}

json basis_to_json(const IntegratedBasisFn& basis) {
  if (const auto* a = std::get_if<AnalyticBasis>(&basis)) {
    json list = json::array();
    for (const auto& b : a->sources) list.push_back(brdf_to_json(b));
    return {{"type", "analytic"}, {"brdfs", list}, {"nodes", a->options.nodes},
            {"samples_per_node", a->options.samples_per_node}, {"seed", a->options.seed}};
  }
  json o = mlp_json(std::get<NetworkBasis>(basis).mlp);
  o["type"] = "network";
  return o;
}

// --- cameras ------------------------------------------------------------------

Camera camera_from_json(const json& o, const std::string& where, bool strict) {
  Camera c;
  c.id = str(o, "id", where);
  if (o.contains("split")) c.split = str(o, "split", where);
  if (c.split != "train" && c.split != "test") fail(where, "split must be 'train' or 'test'");
  if (o.contains("image")) c.image = str(o, "image", where);
  if (o.contains("look_at")) {
    check_keys(o, {"id", "split", "image", "width", "height", "look_at"}, where, strict);
    const json& l = o.at("look_at");
    check_keys(l, {"eye", "target", "up", "fov_y_deg"}, where + ".look_at", strict);
    const int w = int_or(o, "width", 128, where), h = int_or(o, "height", 128, where);
    const Camera base = Camera::look_at(vec3(l, "eye", where), vec3(l, "target", where), vec3(l, "up", where),
                                        num(l, "fov_y_deg", where) * kPi / 180.0, w, h);
    c.width = base.width;
    c.height = base.height;
    c.fx = base.fx;
    c.fy = base.fy;
    c.cx = base.cx;
    c.cy = base.cy;
    c.rotation = base.rotation;
    c.position = base.position;
  } else {
    check_keys(o, {"id", "split", "image", "width", "height", "fx", "fy", "cx", "cy", "rotation", "position"}, where,
               strict);
    c.width = int_or(o, "width", 128, where);
    c.height = int_or(o, "height", 128, where);
    c.fx = num(o, "fx", where);
    c.fy = num(o, "fy", where);
    c.cx = num(o, "cx", where);
    c.cy = num(o, "cy", where);
    const json& r = req(o, "rotation", where);
    if (!r.is_array() || r.size() != 3) fail(where + ".rotation", "expected 3 rows");
    for (int i = 0; i < 3; ++i) c.rotation.row(i) = vec(r[static_cast<std::size_t>(i)], where + ".rotation", 3).transpose();
    c.position = vec3(o, "position", where);
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  return c;
}

json camera_to_json(const Camera& c) {
  json rot = json::array();
  for (int i = 0; i < 3; ++i) rot.push_back(to_json(Vec3(c.rotation.row(i).transpose())));
  json o{{"id", c.id}, {"split", c.split}, {"width", c.width}, {"height", c.height}, {"fx", c.fx}, {"fy", c.fy},
         {"cx", c.cx}, {"cy", c.cy}, {"rotation", rot}, {"position", to_json(c.position)}};
  if (!c.image.empty()) o["image"] = c.image;
  return o;
}

struct NetworkEntry {
  std::string name;
  const Mlp* mlp;
  std::vector<std::string> outputs;
};

std::vector<NetworkEntry> scene_networks(const Scene& s) {
  std::vector<NetworkEntry> out;
  if (const auto* d = std::get_if<NetworkDisplacement>(&s.geometry.displacement)) {
    out.push_back({"displacement", &d->mlp, {"identity"}});
  }
  if (const auto* m = std::get_if<NetworkField>(&s.material)) {
    std::vector<std::string> o{"logistic", "logistic", "logistic", "logistic", "softplus_inverse_kappa"};
    o.insert(o.end(), static_cast<std::size_t>(m->k), "identity");
    out.push_back({"material", &m->mlp, o});
  }
  if (const auto* b = std::get_if<NetworkBasis>(&s.basis)) {
    out.push_back({"basis", &b->mlp, std::vector<std::string>(static_cast<std::size_t>(b->mlp.outputs()), "identity")});
  }
  return out;
}

json networks_meta(const Scene& s) {
  json list = json::array();
  for (const auto& n : scene_networks(s)) {
    const ParamSlice sl = n.mlp->slice();
    list.push_back({{"name", n.name}, {"widths", n.mlp->widths()}, {"activation", to_string(n.mlp->hidden().kind)},
                    {"param", n.mlp->hidden().param}, {"output_activation", "identity"}, {"squash", n.outputs},
                    {"offset", sl.offset}, {"size", sl.size}});
  }
  return {{"networks", list}};
}

}  // namespace

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where, bool strict) {
  if (!obj.is_object()) fail(where, "expected an object");
  if (!strict) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(where, "unknown key '" + it.key() + "'");
  }
}

std::string parent_dir(const std::string& path) {
  const auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

std::string resolve_path(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
}

json light_to_json(const SHLight& light) {
  json rows = json::array();
  for (int c = 0; c < 3; ++c) rows.push_back(to_json(Eigen::VectorXd(light.coeffs().row(c).transpose())));
  return {{"l_max", light.l_max()}, {"coeffs", rows}};
}

SHLight light_from_json(const json& o) {
  const std::string where = "light";
  check_keys(o, {"l_max", "coeffs"}, where, true);
  const json& lm = req(o, "l_max", where);
  if (!lm.is_number_integer()) fail(where + ".l_max", "expected an integer");
  const int l_max = lm.get<int>();
  if (l_max < 0 || l_max > kMaxShOrder) fail(where + ".l_max", "out of range [0, 20]");
  const json& rows = req(o, "coeffs", where);
  if (!rows.is_array() || rows.size() != 3) fail(where + ".coeffs", "expected three channel rows");
  Eigen::MatrixXd c(3, sh_count(l_max));
  for (int i = 0; i < 3; ++i) c.row(i) = vec(rows[static_cast<std::size_t>(i)], where + ".coeffs", sh_count(l_max)).transpose();
  return SHLight(l_max, c);
}

SHLight load_light(const std::string& path) { return light_from_json(load_json(path)); }

void save_light(const SHLight& light, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << light_to_json(light).dump(2) << '\n';
}

Scene scene_from_json(const json& doc, const std::string& base_dir, const SceneLoadOptions& options) {
  const bool strict = options.strict;
  check_keys(doc, {"version", "omega", "geometry", "material", "basis", "light", "beta", "weights", "seed", "render", "cameras"},
             "scene", strict);
  Scene s;
  s.version = int_or(doc, "version", kSceneVersion, "scene");
  if (s.version != kSceneVersion) fail("scene.version", "unsupported version " + std::to_string(s.version));
  if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();

  const json& omega = req(doc, "omega", "scene");
  check_keys(omega, {"center", "radius"}, "omega", strict);
  s.geometry.omega = {vec3(omega, "center", "omega"), num(omega, "radius", "omega")};
  if (!(s.geometry.omega.radius > 0.0)) fail("omega", "radius must be positive");

  const json& g = req(doc, "geometry", "scene");
  check_keys(g, {"prior", "open_back", "back_axis", "back_origin", "displacement"}, "geometry", strict);
  s.geometry.prior = prior_from_json(g, strict);
  s.geometry.displacement = displacement_from_json(g, s, strict);
  s.material = material_from_json(req(doc, "material", "scene"), s, strict);
  s.basis = basis_from_json(req(doc, "basis", "scene"), s, strict);
  if (coeff_count(s.material) != basis_count(s.basis)) fail("scene", "material coefficient count differs from basis count");

  try {
    s.light = light_from_json(req(doc, "light", "scene"));
  } catch (const DomainError& e) {
    fail("light", e.what());
  }
  s.beta = num_or(doc, "beta", 0.1, "scene");
  if (!(s.beta > 0.0)) fail("scene.beta", "must be positive");

  if (doc.contains("render")) {
    const json& r = doc.at("render");
    check_keys(r, {"window_samples", "window_half_width", "unhit_samples", "hit_threshold", "step_factor", "max_iterations",
                   "tile_size"},
               "render", strict);
    RenderSettings& st = s.settings;
    st.window_samples = int_or(r, "window_samples", st.window_samples, "render");
    st.window_half_width = num_or(r, "window_half_width", st.window_half_width, "render");
    st.unhit_samples = int_or(r, "unhit_samples", st.unhit_samples, "render");
    st.trace.hit_threshold = num_or(r, "hit_threshold", st.trace.hit_threshold, "render");
    st.trace.step_factor = num_or(r, "step_factor", st.trace.step_factor, "render");
    st.trace.max_iterations = int_or(r, "max_iterations", st.trace.max_iterations, "render");
    st.tile_size = int_or(r, "tile_size", st.tile_size, "render");
    if (st.window_samples < 2 || st.unhit_samples < 1 || st.tile_size < 1 || st.trace.max_iterations < 1 ||
        !(st.trace.hit_threshold > 0.0) || !(st.trace.step_factor > 0.0) || !(st.window_half_width > 0.0)) {
      fail("render", "settings out of range");
    }
  }

  if (doc.contains("cameras")) {
    const json& cams = doc.at("cameras");
    if (!cams.is_array()) fail("scene.cameras", "expected an array");
    for (std::size_t i = 0; i < cams.size(); ++i) {
      s.cameras.push_back(camera_from_json(cams[i], "cameras[" + std::to_string(i) + "]", strict));
      for (std::size_t j = 0; j < i; ++j) {
        if (s.cameras[j].id == s.cameras[i].id) fail("scene.cameras", "duplicate camera id '" + s.cameras[i].id + "'");
      }
    }
  }

  if (doc.contains("weights")) {
    const std::string path = resolve_path(base_dir, str(doc, "weights", "scene"));
    std::vector<BlobArray> arrays;
    try {
      arrays = read_blob(path);
    } catch (const std::runtime_error& e) {
      throw SchemaError(e.what());
    }
    const BlobArray* params = nullptr;
    for (const auto& a : arrays) {
      if (a.name == "params") params = &a;
    }
    if (!params) fail("weights", "blob has no 'params' array");
    if (params->data.size() != s.params.size()) {
      fail("weights", "blob holds " + std::to_string(params->data.size()) + " parameters, scene networks need " +
                          std::to_string(s.params.size()));
    }
    s.params.values() = params->data;
  } else {
    std::uint64_t stream = 11;
    for (const auto& n : scene_networks(s)) {
      n.mlp->initialize(s.params, CounterRng::derive(s.seed, stream++));
      if (n.name == "displacement") n.mlp->set_output_layer(s.params, 0.0, Eigen::VectorXd::Zero(1));
    }
  }
  return s;
}

Scene load_scene(const std::string& path, const SceneLoadOptions& options) {
  return scene_from_json(load_json(path), parent_dir(path), options);
}

json scene_to_json(const Scene& s, const std::string& weights) {
  json g{{"prior", prior_to_json(s.geometry.prior)}, {"displacement", displacement_to_json(s.geometry.displacement)}};
  if (s.geometry.prior.open_back) {
    g["open_back"] = true;
    g["back_axis"] = to_json(s.geometry.prior.back_axis);
    g["back_origin"] = to_json(s.geometry.prior.back_origin);
  }
  const RenderSettings& st = s.settings;
  json doc{{"version", s.version},
           {"seed", s.seed},
           {"omega", {{"center", to_json(s.geometry.omega.center)}, {"radius", s.geometry.omega.radius}}},
           {"geometry", g},
           {"material", material_to_json(s.material)},
           {"basis", basis_to_json(s.basis)},
           {"light", light_to_json(s.light)},
           {"beta", s.beta},
           {"render",
            {{"window_samples", st.window_samples},
             {"window_half_width", st.window_half_width},
             {"unhit_samples", st.unhit_samples},
             {"hit_threshold", st.trace.hit_threshold},
             {"step_factor", st.trace.step_factor},
             {"max_iterations", st.trace.max_iterations},
             {"tile_size", st.tile_size}}}};
  json cams = json::array();
  for (const auto& c : s.cameras) cams.push_back(camera_to_json(c));
  doc["cameras"] = cams;
  if (!weights.empty()) doc["weights"] = weights;
  return doc;
}

void save_scene(const Scene& s, const std::string& path) {
  std::string weights;
  if (s.params.size() > 0) {
    const std::filesystem::path p(path);
    weights = p.stem().string() + ".bin";
    write_blob(resolve_path(parent_dir(path), weights), {{"params", s.params.values()}}, networks_meta(s));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << scene_to_json(s, weights).dump(2) << '\n';
}

}  // namespace facelight
