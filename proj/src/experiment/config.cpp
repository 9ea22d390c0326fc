#include "siir/experiment/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace siir::experiment {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

// Walks one JSON object, type-checking fields and rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        fail(child(key), "unknown key");
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json* find(const char* key) const {
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const char* key, double& out) const {
    if (const json* v = find(key)) out = as_double(*v, child(key));
  }
  void read(const char* key, std::size_t& out) const {
    if (const json* v = find(key)) out = as_count(*v, child(key));
  }
  void read(const char* key, std::string& out) const {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(child(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  void read(const char* key, std::vector<T>& out) const {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) fail(child(key), "expected an array");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = child(key) + "[" + std::to_string(i) + "]";
      const json& e = (*v)[i];
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(as_double(e, p));
      } else if constexpr (std::is_same_v<T, std::size_t>) {
        out.push_back(as_count(e, p));
      } else {
        if (!e.is_string()) fail(p, "expected a string");
        out.push_back(e.get<std::string>());
      }
    }
  }

  static double as_double(const json& v, const std::string& p) {
    if (!v.is_number()) fail(p, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(p, "must be finite");
    return d;
  }
  static std::uint64_t as_u64(const json& v, const std::string& p) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      fail(p, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  static std::size_t as_count(const json& v, const std::string& p) { return static_cast<std::size_t>(as_u64(v, p)); }

 private:
  const json& j_;
  std::string path_;
};

bool contains(const std::vector<std::string>& names, const std::string& s) {
  return std::find(names.begin(), names.end(), s) != names.end();
}

void validate(const ExperimentConfig& c) {
  if (c.geometry.elements < 2) fail("geometry.elements", "must be >= 2");
  if (c.geometry.elements > 64) fail("geometry.elements", "must be <= 64");
  if (!(c.geometry.spacing_wavelengths > 0.0 && c.geometry.spacing_wavelengths <= 0.5))
    fail("geometry.spacing_wavelengths", "must be in (0, 0.5]");

  for (std::size_t i = 0; i < c.scene.targets.size(); ++i) {
    const double th = c.scene.targets[i].theta_deg;
    if (!(th > 0.0 && th < 180.0)) fail("scene.targets[" + std::to_string(i) + "].theta_deg", "must be in (0, 180)");
  }
  if (c.scene.targets.size() >= c.geometry.elements) fail("scene.targets", "need fewer targets than elements");
  if (c.scene.snapshots < 1) fail("scene.snapshots", "must be >= 1");

  if (!contains(method_names(), c.method.name)) fail("method.name", "unknown method '" + c.method.name + "'");
  const auto& p = c.method.params;
  if (!(p.lambda_r >= 0.0)) fail("method.params.lambda_r", "must be >= 0");
  if (p.subarray_size < 2) fail("method.params.subarray_size", "must be >= 2");
  if (p.nested_n1 < 1) fail("method.params.nested.n1", "must be >= 1");
  if (p.nested_n2 < 1) fail("method.params.nested.n2", "must be >= 1");
  if (p.grid_points < 64) fail("method.params.grid_points", "must be >= 64");
  if (p.k == 0.0) fail("method.params.k", "must be nonzero");
  if (!(p.r > 0.0)) fail("method.params.r", "must be > 0");
  if (!(p.loop_gain >= 0.0)) fail("method.params.loop_gain", "must be >= 0");
  if (!(p.clamp_db > 0.0)) fail("method.params.clamp_db", "must be > 0");

  for (std::size_t i = 0; i < c.sweep.methods.size(); ++i)
    if (!contains(method_names(), c.sweep.methods[i]))
      fail("sweep.methods[" + std::to_string(i) + "]", "unknown method '" + c.sweep.methods[i] + "'");
  if (c.sweep.monte_carlo < 1) fail("sweep.monte_carlo", "must be >= 1");

  if (!(c.pattern.theta0_deg >= 0.0 && c.pattern.theta0_deg < 180.0)) fail("pattern.theta0_deg", "must be in [0, 180)");
  for (std::size_t i = 0; i < c.pattern.beamformers.size(); ++i)
    if (!contains(beamformer_names(), c.pattern.beamformers[i]))
      fail("pattern.beamformers[" + std::to_string(i) + "]", "unknown beamformer '" + c.pattern.beamformers[i] + "'");
  if (c.pattern.normalization != "unit_gain" && c.pattern.normalization != "dirichlet_ratio")
    fail("pattern.normalization", "must be 'unit_gain' or 'dirichlet_ratio'");

  for (std::size_t i = 0; i < c.fsll.elements.size(); ++i)
    if (c.fsll.elements[i] < 8) fail("fsll.elements[" + std::to_string(i) + "]", "must be >= 8");

  if (!(c.fim.theta0_deg >= 0.0 && c.fim.theta0_deg < 180.0)) fail("fim.theta0_deg", "must be in [0, 180)");
  if (c.fim.offsets < 1) fail("fim.offsets", "must be >= 1");
  if (!(c.fim.sigma2 > 0.0)) fail("fim.sigma2", "must be > 0");
  if (!(c.fim.omega_s > 0.0)) fail("fim.omega_s", "must be > 0");
  if (c.fim.integration_points < 1024) fail("fim.integration_points", "must be >= 1024");

  if (c.output.format != "csv" && c.output.format != "jsonl") fail("output.format", "must be 'csv' or 'jsonl'");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }

  ExperimentConfig c;
  const ObjectReader top(root, "",
                         {"description", "geometry", "scene", "method", "sweep", "pattern", "fsll", "fim", "output"});
  top.read("description", c.description);

  if (const json* g = top.find("geometry")) {
    const ObjectReader r(*g, "geometry", {"elements", "spacing_wavelengths"});
    r.read("elements", c.geometry.elements);
    r.read("spacing_wavelengths", c.geometry.spacing_wavelengths);
  }
  if (const json* s = top.find("scene")) {
    const ObjectReader r(*s, "scene", {"targets", "snr_db", "snapshots", "seed"});
    if (const json* t = r.find("targets")) {
      if (!t->is_array()) fail("scene.targets", "expected an array");
      for (std::size_t i = 0; i < t->size(); ++i) {
        const ObjectReader tr((*t)[i], "scene.targets[" + std::to_string(i) + "]", {"theta_deg", "power_db"});
        TargetSpec ts;
        if (!tr.find("theta_deg")) fail(tr.child("theta_deg"), "required");
        tr.read("theta_deg", ts.theta_deg);
        tr.read("power_db", ts.power_db);
        c.scene.targets.push_back(ts);
      }
    }
    r.read("snr_db", c.scene.snr_db);
    r.read("snapshots", c.scene.snapshots);
    if (const json* seed = r.find("seed")) c.scene.seed = ObjectReader::as_u64(*seed, "scene.seed");
  }
  if (const json* m = top.find("method")) {
    const ObjectReader r(*m, "method", {"name", "params"});
    r.read("name", c.method.name);
    if (const json* p = r.find("params")) {
      const ObjectReader pr(*p, "method.params",
                            {"lambda_r", "subarray_size", "nested", "retransmissions", "grid_points", "k", "r",
                             "loop_gain", "clamp_db"});
      auto& mp = c.method.params;
      pr.read("lambda_r", mp.lambda_r);
      pr.read("subarray_size", mp.subarray_size);
      if (const json* nested = pr.find("nested")) {
        const ObjectReader nr(*nested, "method.params.nested", {"n1", "n2"});
        nr.read("n1", mp.nested_n1);
        nr.read("n2", mp.nested_n2);
      }
      pr.read("retransmissions", mp.retransmissions);
      pr.read("grid_points", mp.grid_points);
      pr.read("k", mp.k);
      pr.read("r", mp.r);
      pr.read("loop_gain", mp.loop_gain);
      pr.read("clamp_db", mp.clamp_db);
    }
  }
  if (const json* s = top.find("sweep")) {
    const ObjectReader r(*s, "sweep", {"methods", "snr_db", "retransmissions", "monte_carlo"});
    r.read("methods", c.sweep.methods);
    r.read("snr_db", c.sweep.snr_db);
    r.read("retransmissions", c.sweep.retransmissions);
    r.read("monte_carlo", c.sweep.monte_carlo);
  }
  if (const json* p = top.find("pattern")) {
    const ObjectReader r(*p, "pattern", {"theta0_deg", "beamformers", "normalization"});
    r.read("theta0_deg", c.pattern.theta0_deg);
    r.read("beamformers", c.pattern.beamformers);
    r.read("normalization", c.pattern.normalization);
  }
  if (const json* f = top.find("fsll")) {
    const ObjectReader r(*f, "fsll", {"elements"});
    r.read("elements", c.fsll.elements);
  }
  if (const json* f = top.find("fim")) {
    const ObjectReader r(*f, "fim", {"theta0_deg", "offsets", "sigma2", "omega_s", "phi", "integration_points"});
    r.read("theta0_deg", c.fim.theta0_deg);
    r.read("offsets", c.fim.offsets);
    r.read("sigma2", c.fim.sigma2);
    r.read("omega_s", c.fim.omega_s);
    r.read("phi", c.fim.phi);
    r.read("integration_points", c.fim.integration_points);
  }
  if (const json* o = top.find("output")) {
    const ObjectReader r(*o, "output", {"format", "path"});
    r.read("format", c.output.format);
    r.read("path", c.output.path);
  }

  validate(c);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string preset_path(const std::string& name) {
  namespace fs = std::filesystem;
  if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos)
    throw ConfigError("invalid preset name '" + name + "'");
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("SPATIAL_IIR_PRESETS")) dirs.emplace_back(env);
#ifdef SIIR_PRESET_DIR
  dirs.emplace_back(SIIR_PRESET_DIR);
#endif
  for (const auto& d : dirs) {
    const fs::path p = d / (name + ".json");
    if (fs::exists(p)) return p.string();
  }
  throw ConfigError("unknown preset '" + name + "'");
}

ExperimentConfig load_preset(const std::string& name) { return load_config_file(preset_path(name)); }

std::string serialize_config(const ExperimentConfig& c) {
  ordered_json j;
  j["description"] = c.description;
  j["geometry"] = {{"elements", c.geometry.elements}, {"spacing_wavelengths", c.geometry.spacing_wavelengths}};
  ordered_json targets = ordered_json::array();
  for (const auto& t : c.scene.targets) targets.push_back({{"theta_deg", t.theta_deg}, {"power_db", t.power_db}});
  j["scene"] = {{"targets", targets}, {"snr_db", c.scene.snr_db}, {"snapshots", c.scene.snapshots}, {"seed", c.scene.seed}};
  const auto& p = c.method.params;
  j["method"] = {{"name", c.method.name},
                 {"params",
                  {{"lambda_r", p.lambda_r},
                   {"subarray_size", p.subarray_size},
                   {"nested", {{"n1", p.nested_n1}, {"n2", p.nested_n2}}},
                   {"retransmissions", p.retransmissions},
                   {"grid_points", p.grid_points},
                   {"k", p.k},
                   {"r", p.r},
                   {"loop_gain", p.loop_gain},
                   {"clamp_db", p.clamp_db}}}};
  j["sweep"] = {{"methods", c.sweep.methods},
                {"snr_db", c.sweep.snr_db},
                {"retransmissions", c.sweep.retransmissions},
                {"monte_carlo", c.sweep.monte_carlo}};
  j["pattern"] = {{"theta0_deg", c.pattern.theta0_deg},
                  {"beamformers", c.pattern.beamformers},
                  {"normalization", c.pattern.normalization}};
  j["fsll"] = {{"elements", c.fsll.elements}};
  j["fim"] = {{"theta0_deg", c.fim.theta0_deg},         {"offsets", c.fim.offsets},
              {"sigma2", c.fim.sigma2},                 {"omega_s", c.fim.omega_s},
              {"phi", c.fim.phi},                       {"integration_points", c.fim.integration_points}};
  j["output"] = {{"format", c.output.format}, {"path", c.output.path}};
  return j.dump(2);
}

TargetScene to_scene(const ExperimentConfig& c) {
  TargetScene s;
  for (const auto& t : c.scene.targets)
    s.targets.push_back({t.theta_deg * std::numbers::pi / 180.0, std::pow(10.0, t.power_db / 10.0)});
  s.snr_db = c.scene.snr_db;
  s.snapshots = c.scene.snapshots;
  s.seed = c.scene.seed;
  return s;
}

ArrayGeometry to_geometry(const ExperimentConfig& c) {
  return ArrayGeometry{c.geometry.elements, c.geometry.spacing_wavelengths};
}

}  // namespace siir::experiment
