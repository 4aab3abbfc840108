#pragma once

// Scenario configuration and scene files (JSON with versioned schema tags),
// KEY=VALUE overrides, and run manifests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sre/activation.hpp"
#include "sre/costs.hpp"
#include "sre/link.hpp"
#include "sre/scene.hpp"

namespace sre {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSceneSchema = "sre-scene/1";
inline constexpr const char* kConfigSchema = "sre-config/1";
inline constexpr const char* kManifestSchema = "sre-manifest/1";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

inline void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline void check_schema(const Json& j, const char* schema, const std::string& where) {
  if (!j.contains("schema") || !j["schema"].is_string() || j["schema"].get<std::string>() != schema)
    throw ConfigError(where + ": expected schema \"" + schema + "\"");
}

}  // namespace detail

// ---- scene files ----

inline Json scene_to_json(const Scene& s) {
  Json j;
  j["schema"] = kSceneSchema;
  j["bounds"] = {{"xmin", s.bounds.xmin}, {"ymin", s.bounds.ymin}, {"xmax", s.bounds.xmax}, {"ymax", s.bounds.ymax}};
  j["bs"] = {{"x", s.bs_position.x()}, {"y", s.bs_position.y()}, {"z", s.bs_position.z()}};
  Json blds = Json::array();
  for (const auto& b : s.buildings) {
    Json v = Json::array();
    for (const auto& p : b.footprint) v.push_back({p.x(), p.y()});
    blds.push_back({{"vertices", v}, {"height", b.height}});
  }
  j["buildings"] = blds;
  return j;
}

inline Scene scene_from_json(const Json& j) {
  const std::string where = "scene";
  detail::check_keys(j, where, {"schema", "bounds", "bs", "buildings"});
  detail::check_schema(j, kSceneSchema, where);
  Scene s;
  try {
    const Json& b = j.at("bounds");
    detail::check_keys(b, "scene.bounds", {"xmin", "ymin", "xmax", "ymax"});
    s.bounds = {b.at("xmin").get<double>(), b.at("ymin").get<double>(), b.at("xmax").get<double>(),
                b.at("ymax").get<double>()};
    const Json& bs = j.at("bs");
    detail::check_keys(bs, "scene.bs", {"x", "y", "z"});
    s.bs_position = Point3(bs.at("x").get<double>(), bs.at("y").get<double>(), bs.at("z").get<double>());
    if (j.contains("buildings")) {
      for (const auto& bj : j.at("buildings")) {
        detail::check_keys(bj, "scene.buildings[]", {"vertices", "height"});
        std::vector<Vec2> fp;
        for (const auto& v : bj.at("vertices")) {
          if (!v.is_array() || v.size() != 2) throw ConfigError("scene: vertices must be [x, y] pairs");
          fp.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
        s.buildings.push_back(normalized_building(std::move(fp), bj.at("height").get<double>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  try {
    s.validate();
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  return s;
}

inline Scene load_scene(const std::filesystem::path& p) {
  return scene_from_json(detail::parse_json(detail::read_file(p), p.string()));
}

inline void save_scene(const std::filesystem::path& p, const Scene& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << scene_to_json(s).dump(2) << '\n';
}

// ---- scenario configuration ----

// A scene given either by file path or inline. The name labels sweep rows;
// it defaults to the file name and survives inlining.
struct SceneSource {
  std::string path;
  std::optional<Scene> scene;
  std::string name;

  bool operator==(const SceneSource&) const = default;
};

enum class UncoverablePolicy { fail, exclude };

struct PlanningParams {
  double snr_threshold_db = 0.0;
  int K = 1;
  double tp_step_m = 5.0;
  double ue_height_m = 1.5;
  double ris_height_m = 5.0;
  double ris_spacing_m = 5.0;
  double ncr_height_m = 6.5;
  UncoverablePolicy uncoverable = UncoverablePolicy::fail;
  bool export_activation = false;

  bool operator==(const PlanningParams&) const = default;
};

struct DeviceCatalogParams {
  std::vector<int> ris_sides{100};
  std::vector<double> ncr_gains_db{55.0};

  bool operator==(const DeviceCatalogParams&) const = default;
};

enum class SweepParameter { price_ratio, ris_dim, ncr_gain, snr_threshold, K };

inline const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::price_ratio: return "price_ratio";
    case SweepParameter::ris_dim: return "ris_dim";
    case SweepParameter::ncr_gain: return "ncr_gain";
    case SweepParameter::snr_threshold: return "snr_threshold";
    case SweepParameter::K: return "K";
  }
  return "?";
}

inline SweepParameter sweep_parameter_from_string(const std::string& s) {
  for (auto p : {SweepParameter::price_ratio, SweepParameter::ris_dim, SweepParameter::ncr_gain,
                 SweepParameter::snr_threshold, SweepParameter::K})
    if (s == to_string(p)) return p;
  throw ConfigError("sweep.parameter: unknown parameter '" + s + "'");
}

struct SweepSpec {
  SweepParameter parameter = SweepParameter::price_ratio;
  std::vector<double> values;
  std::vector<SceneSource> scenarios;  // empty: the config's own scene

  bool operator==(const SweepSpec&) const = default;
};

struct GeneratorParams {
  double size_m = 400.0;
  double block_m = 50.0;
  double street_m = 14.0;
  double fill = 0.75;
  double building_height_m = 6.0;
  double bs_mast_m = 1.5;

  bool operator==(const GeneratorParams&) const = default;
};

struct ScenarioConfig {
  SceneSource scene;
  RadioParams radio;
  BlockageParams blockage;
  CostParams costs;
  ArrayParams arrays;
  DeviceCatalogParams devices;
  PlanningParams planning;
  std::optional<SweepSpec> sweep;
  GeneratorParams generator;
  std::uint64_t seed = 1;

  bool operator==(const ScenarioConfig&) const = default;

  void validate() const {
    if (!(radio.carrier_hz > 0.0)) throw ConfigError("radio.carrier_hz must be positive");
    for (double v : {radio.bandwidth_hz, radio.tx_power_dbm, radio.noise_dbm, radio.ncr_noise_dbm})
      if (!std::isfinite(v)) throw ConfigError("radio parameters must be finite");
    for (double v : {blockage.blocker_height, blockage.density, blockage.velocity, blockage.mean_duration, blockage.loss_db})
      if (!(v >= 0.0)) throw ConfigError("blockage parameters must be non-negative");
    try {
      costs.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("costs: ") + e.what());
    }
    if (arrays.bs_horizontal < 1 || arrays.bs_vertical < 1 || arrays.ncr_horizontal < 1 || arrays.ncr_vertical < 1 ||
        arrays.ue_elements < 1 || arrays.bs_sector_azimuth_deg.empty())
      throw ConfigError("arrays: element counts must be at least 1 and at least one BS sector is needed");
    for (int s : devices.ris_sides)
      if (s < 1) throw ConfigError("devices.ris_sides entries must be at least 1");
    for (double g : devices.ncr_gains_db)
      if (!(g >= 0.0)) throw ConfigError("devices.ncr_gains_db entries must be non-negative");
    if (planning.K < 1) throw ConfigError("planning.K must be at least 1");
    if (!(planning.tp_step_m > 0.0)) throw ConfigError("planning.tp_step_m must be positive");
    if (!(planning.ris_spacing_m > 0.0)) throw ConfigError("planning.ris_spacing_m must be positive");
    if (std::isnan(planning.snr_threshold_db)) throw ConfigError("planning.snr_threshold_db is NaN");
    if (sweep && sweep->values.empty()) throw ConfigError("sweep.values must not be empty");
    if (!(generator.size_m > 0.0 && generator.block_m > generator.street_m && generator.street_m >= 0.0 &&
          generator.fill >= 0.0 && generator.fill <= 1.0 && generator.building_height_m > 0.0))
      throw ConfigError("generator parameters out of range");
  }
};

inline const char* to_string(UncoverablePolicy p) { return p == UncoverablePolicy::fail ? "fail" : "exclude"; }

namespace detail {

inline Json scene_source_to_json(const SceneSource& s) {
  if (!s.scene) return s.path;
  Json j = scene_to_json(*s.scene);
  if (!s.name.empty()) j["name"] = s.name;
  return j;
}

inline std::string scene_name_from_path(const std::filesystem::path& p) {
  std::string stem = p.stem().string();
  const std::string tail = ".scene";
  if (stem.size() > tail.size() && stem.compare(stem.size() - tail.size(), tail.size(), tail) == 0)
    stem.resize(stem.size() - tail.size());
  return stem;
}

inline SceneSource scene_source_from_json(const Json& j, const std::filesystem::path& base) {
  SceneSource s;
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative() && !base.empty()) p = base / p;
    s.path = p.lexically_normal().string();
    s.name = scene_name_from_path(p);
  } else if (j.is_object()) {
    Json body = j;
    if (body.contains("name")) {
      if (!body["name"].is_string()) throw ConfigError("scene.name must be a string");
      s.name = body["name"].get<std::string>();
      body.erase("name");
    }
    s.scene = scene_from_json(body);
  } else {
    throw ConfigError("scene must be a file path or an inline scene object");
  }
  return s;
}

}  // namespace detail

inline Json config_to_json(const ScenarioConfig& c) {
  Json j;
  j["schema"] = kConfigSchema;
  j["scene"] = detail::scene_source_to_json(c.scene);
  j["radio"] = {{"carrier_hz", c.radio.carrier_hz},
                {"bandwidth_hz", c.radio.bandwidth_hz},
                {"tx_power_dbm", c.radio.tx_power_dbm},
                {"noise_dbm", c.radio.noise_dbm},
                {"ncr_noise_dbm", c.radio.ncr_noise_dbm}};
  j["blockage"] = {{"blocker_height_m", c.blockage.blocker_height},
                   {"density_per_m2", c.blockage.density},
                   {"velocity_mps", c.blockage.velocity},
                   {"mean_duration_s", c.blockage.mean_duration},
                   {"loss_db", c.blockage.loss_db}};
  Json costs = {{"ris_deploy", c.costs.ris_deploy},
                {"ris_per_atom", c.costs.ris_per_atom},
                {"ncr_deploy", c.costs.ncr_deploy},
                {"ncr_per_db", c.costs.ncr_per_db}};
  costs["ncr_price_ratio"] = c.costs.ncr_price_ratio ? Json(*c.costs.ncr_price_ratio) : Json(nullptr);
  j["costs"] = costs;
  j["devices"] = {{"ris_sides", c.devices.ris_sides}, {"ncr_gains_db", c.devices.ncr_gains_db}};
  j["arrays"] = {{"bs_horizontal", c.arrays.bs_horizontal},
                 {"bs_vertical", c.arrays.bs_vertical},
                 {"bs_sector_azimuth_deg", c.arrays.bs_sector_azimuth_deg},
                 {"ncr_horizontal", c.arrays.ncr_horizontal},
                 {"ncr_vertical", c.arrays.ncr_vertical},
                 {"ue_elements", c.arrays.ue_elements}};
  j["planning"] = {{"snr_threshold_db", c.planning.snr_threshold_db},
                   {"K", c.planning.K},
                   {"tp_step_m", c.planning.tp_step_m},
                   {"ue_height_m", c.planning.ue_height_m},
                   {"ris_height_m", c.planning.ris_height_m},
                   {"ris_spacing_m", c.planning.ris_spacing_m},
                   {"ncr_height_m", c.planning.ncr_height_m},
                   {"uncoverable", to_string(c.planning.uncoverable)},
                   {"export_activation", c.planning.export_activation}};
  if (c.sweep) {
    Json sc = Json::array();
    for (const auto& s : c.sweep->scenarios) sc.push_back(detail::scene_source_to_json(s));
    j["sweep"] = {{"parameter", to_string(c.sweep->parameter)}, {"values", c.sweep->values}, {"scenarios", sc}};
  }
  j["generator"] = {{"size_m", c.generator.size_m},
                    {"block_m", c.generator.block_m},
                    {"street_m", c.generator.street_m},
                    {"fill", c.generator.fill},
                    {"building_height_m", c.generator.building_height_m},
                    {"bs_mast_m", c.generator.bs_mast_m}};
  j["seed"] = c.seed;
  return j;
}

// `base` resolves relative scene paths (normally the config file's directory).
inline ScenarioConfig config_from_json(const Json& j, const std::filesystem::path& base = {}) {
  using detail::read;
  detail::check_keys(j, "config",
                     {"schema", "scene", "radio", "blockage", "costs", "devices", "arrays", "planning", "sweep",
                      "generator", "seed"});
  detail::check_schema(j, kConfigSchema, "config");
  ScenarioConfig c;
  if (j.contains("scene")) c.scene = detail::scene_source_from_json(j["scene"], base);
  if (j.contains("radio")) {
    const Json& r = j["radio"];
    detail::check_keys(r, "radio", {"carrier_hz", "bandwidth_hz", "tx_power_dbm", "noise_dbm", "ncr_noise_dbm"});
    read(r, "carrier_hz", c.radio.carrier_hz, "radio");
    read(r, "bandwidth_hz", c.radio.bandwidth_hz, "radio");
    read(r, "tx_power_dbm", c.radio.tx_power_dbm, "radio");
    read(r, "noise_dbm", c.radio.noise_dbm, "radio");
    read(r, "ncr_noise_dbm", c.radio.ncr_noise_dbm, "radio");
  }
  if (j.contains("blockage")) {
    const Json& b = j["blockage"];
    detail::check_keys(b, "blockage", {"blocker_height_m", "density_per_m2", "velocity_mps", "mean_duration_s", "loss_db"});
    read(b, "blocker_height_m", c.blockage.blocker_height, "blockage");
    read(b, "density_per_m2", c.blockage.density, "blockage");
    read(b, "velocity_mps", c.blockage.velocity, "blockage");
    read(b, "mean_duration_s", c.blockage.mean_duration, "blockage");
    read(b, "loss_db", c.blockage.loss_db, "blockage");
  }
  if (j.contains("costs")) {
    const Json& o = j["costs"];
    detail::check_keys(o, "costs", {"ris_deploy", "ris_per_atom", "ncr_deploy", "ncr_per_db", "ncr_price_ratio"});
    read(o, "ris_deploy", c.costs.ris_deploy, "costs");
    read(o, "ris_per_atom", c.costs.ris_per_atom, "costs");
    read(o, "ncr_deploy", c.costs.ncr_deploy, "costs");
    read(o, "ncr_per_db", c.costs.ncr_per_db, "costs");
    if (o.contains("ncr_price_ratio") && !o["ncr_price_ratio"].is_null()) {
      double r = 0.0;
      read(o, "ncr_price_ratio", r, "costs");
      c.costs.ncr_price_ratio = r;
    }
  }
  if (j.contains("devices")) {
    const Json& d = j["devices"];
    detail::check_keys(d, "devices", {"ris_sides", "ncr_gains_db"});
    read(d, "ris_sides", c.devices.ris_sides, "devices");
    read(d, "ncr_gains_db", c.devices.ncr_gains_db, "devices");
  }
  if (j.contains("arrays")) {
    const Json& a = j["arrays"];
    detail::check_keys(a, "arrays",
                       {"bs_horizontal", "bs_vertical", "bs_sector_azimuth_deg", "ncr_horizontal", "ncr_vertical", "ue_elements"});
    read(a, "bs_horizontal", c.arrays.bs_horizontal, "arrays");
    read(a, "bs_vertical", c.arrays.bs_vertical, "arrays");
    read(a, "bs_sector_azimuth_deg", c.arrays.bs_sector_azimuth_deg, "arrays");
    read(a, "ncr_horizontal", c.arrays.ncr_horizontal, "arrays");
    read(a, "ncr_vertical", c.arrays.ncr_vertical, "arrays");
    read(a, "ue_elements", c.arrays.ue_elements, "arrays");
  }
  if (j.contains("planning")) {
    const Json& p = j["planning"];
    detail::check_keys(p, "planning",
                       {"snr_threshold_db", "K", "tp_step_m", "ue_height_m", "ris_height_m", "ris_spacing_m",
                        "ncr_height_m", "uncoverable", "export_activation"});
    read(p, "snr_threshold_db", c.planning.snr_threshold_db, "planning");
    read(p, "K", c.planning.K, "planning");
    read(p, "tp_step_m", c.planning.tp_step_m, "planning");
    read(p, "ue_height_m", c.planning.ue_height_m, "planning");
    read(p, "ris_height_m", c.planning.ris_height_m, "planning");
    read(p, "ris_spacing_m", c.planning.ris_spacing_m, "planning");
    read(p, "ncr_height_m", c.planning.ncr_height_m, "planning");
    read(p, "export_activation", c.planning.export_activation, "planning");
    if (p.contains("uncoverable")) {
      std::string s;
      read(p, "uncoverable", s, "planning");
      if (s == "fail")
        c.planning.uncoverable = UncoverablePolicy::fail;
      else if (s == "exclude")
        c.planning.uncoverable = UncoverablePolicy::exclude;
      else
        throw ConfigError("planning.uncoverable must be \"fail\" or \"exclude\"");
    }
  }
  if (j.contains("sweep") && !j["sweep"].is_null()) {
    const Json& s = j["sweep"];
    detail::check_keys(s, "sweep", {"parameter", "values", "scenarios"});
    SweepSpec sw;
    std::string name;
    read(s, "parameter", name, "sweep");
    sw.parameter = sweep_parameter_from_string(name);
    read(s, "values", sw.values, "sweep");
    if (s.contains("scenarios"))
      for (const auto& e : s["scenarios"]) sw.scenarios.push_back(detail::scene_source_from_json(e, base));
    c.sweep = std::move(sw);
  }
  if (j.contains("generator")) {
    const Json& g = j["generator"];
    detail::check_keys(g, "generator", {"size_m", "block_m", "street_m", "fill", "building_height_m", "bs_mast_m"});
    read(g, "size_m", c.generator.size_m, "generator");
    read(g, "block_m", c.generator.block_m, "generator");
    read(g, "street_m", c.generator.street_m, "generator");
    read(g, "fill", c.generator.fill, "generator");
    read(g, "building_height_m", c.generator.building_height_m, "generator");
    read(g, "bs_mast_m", c.generator.bs_mast_m, "generator");
  }
  read(j, "seed", c.seed, "config");
  c.validate();
  return c;
}

// KEY=VALUE with a dotted key path; the value is read as JSON when it parses
// as JSON, otherwise as a plain string.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' does not name an object field");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

// Reads a config file (or the config embedded in a run manifest).
inline Json load_config_document(const std::filesystem::path& p) {
  Json j = detail::parse_json(detail::read_file(p), p.string());
  if (j.is_object() && j.contains("schema") && j["schema"] == kManifestSchema) {
    if (!j.contains("config")) throw ConfigError(p.string() + ": manifest has no config");
    return j["config"];
  }
  return j;
}

inline ScenarioConfig load_config(const std::filesystem::path& p, const std::vector<std::string>& overrides = {}) {
  Json j = load_config_document(p);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j, p.parent_path());
}

// Loads file-based scenes so the config is self-contained.
inline Scene resolve_scene(const SceneSource& s) {
  if (s.scene) return *s.scene;
  if (s.path.empty()) throw ConfigError("no scene given");
  return load_scene(s.path);
}

inline ScenarioConfig resolved(ScenarioConfig c) {
  c.scene.scene = resolve_scene(c.scene);
  c.scene.path.clear();
  if (c.sweep)
    for (auto& s : c.sweep->scenarios) {
      s.scene = resolve_scene(s);
      s.path.clear();
    }
  return c;
}

}  // namespace sre
