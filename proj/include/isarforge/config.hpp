#pragma once

// Dataset configuration (JSON). Relative mesh paths resolve against the
// directory of the config file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isarforge/core.hpp"
#include "isarforge/imaging.hpp"
#include "isarforge/kinematics.hpp"
#include "isarforge/mesh.hpp"
#include "isarforge/radar.hpp"
#include "isarforge/vehicles.hpp"

namespace isarforge {

/// A target is either a built-in fleet model (no mesh path) or a mesh file
/// with an optional sidecar.
struct TargetSpec {
  std::string name;
  std::optional<std::filesystem::path> mesh;
  std::optional<std::filesystem::path> sidecar;
};

enum class F32Output { kAll, kIdeal, kNone };

inline std::string f32_output_name(F32Output o) {
  switch (o) {
    case F32Output::kAll: return "all";
    case F32Output::kIdeal: return "ideal";
    case F32Output::kNone: return "none";
  }
  return "all";
}

inline F32Output parse_f32_output(const std::string& s) {
  if (s == "all") return F32Output::kAll;
  if (s == "ideal") return F32Output::kIdeal;
  if (s == "none") return F32Output::kNone;
  throw ConfigError("output.f32 must be all, ideal or none (got '" + s + "')");
}

struct OutputOptions {
  F32Output f32 = F32Output::kAll;
  int png_compression = 3;
};

struct DatasetConfig {
  std::vector<TargetSpec> targets;
  std::vector<Route> routes = all_routes();
  double speed_mps = 8.0;
  double duration_s = 5.0;
  double frame_dt_s = 0.01;
  JunctionGeometry junction;
  RadarParams radar;
  std::vector<double> snr_ladder_db{-5.0, 0.0, 5.0, 10.0};
  std::vector<double> wind_ladder_mps{2.5, 5.0, 7.5, 10.0};
  double sigma0_mean_db = -15.0;
  Window window = Window::kNone;
  double omega_min = kDefaultOmegaMin;
  bool drop_first_cpi = true;
  bool trim_outside_beam = true;
  std::optional<std::size_t> max_cpis;  ///< per trajectory, after dropping and trimming
  OutputOptions output;
  std::uint64_t seed = 1;

  void validate() const {
    if (targets.empty()) throw ConfigError("config lists no targets");
    if (routes.empty()) throw ConfigError("config lists no routes");
    if (!(speed_mps > 0.0)) throw ConfigError("speed_mps must be positive");
    if (!(duration_s > 0.0)) throw ConfigError("duration_s must be positive");
    if (!(frame_dt_s > 0.0)) throw ConfigError("frame_dt_s must be positive");
    if (!(omega_min >= 0.0)) throw ConfigError("omega_min must be non-negative");
    for (double w : wind_ladder_mps)
      if (!(w >= 0.0)) throw ConfigError("wind speeds must be non-negative");
    if (output.png_compression < 0 || output.png_compression > 9)
      throw ConfigError("output.png_compression must be within 0..9");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i].name.empty()) throw ConfigError("target " + std::to_string(i) + " has no name");
      for (std::size_t j = 0; j < i; ++j)
        if (targets[j].name == targets[i].name) throw ConfigError("duplicate target '" + targets[i].name + "'");
    }
    radar.validate();
  }
};

namespace detail {

inline std::vector<double> number_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

inline JunctionGeometry junction_from_json(const nlohmann::json& j) {
  JunctionGeometry g;
  for (const auto& [key, v] : j.items()) {
    if (key == "center_m") {
      if (!v.is_array() || v.size() != 2) throw ConfigError("junction.center_m must be [x, y]");
      g.center = {v[0].get<double>(), v[1].get<double>(), 0.0};
    } else if (key == "lane_offset_m") g.lane_offset = v.get<double>();
    else if (key == "right_radius_m") g.right_radius = v.get<double>();
    else if (key == "left_radius_m") g.left_radius = v.get<double>();
    else if (key == "uturn_radius_m") g.uturn_radius = v.get<double>();
    else throw ConfigError("unknown junction key '" + key + "'");
  }
  if (!(g.lane_offset >= 0.0 && g.right_radius > 0.0 && g.left_radius > 0.0 && g.uturn_radius > 0.0))
    throw ConfigError("junction radii must be positive and the lane offset non-negative");
  return g;
}

inline nlohmann::json junction_to_json(const JunctionGeometry& g) {
  return {{"center_m", {g.center.x, g.center.y}},
          {"lane_offset_m", g.lane_offset},
          {"right_radius_m", g.right_radius},
          {"left_radius_m", g.left_radius},
          {"uturn_radius_m", g.uturn_radius}};
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace detail

inline DatasetConfig dataset_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  DatasetConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "targets") {
        if (!v.is_array()) throw ConfigError("targets must be an array");
        for (const auto& t : v) {
          TargetSpec s;
          if (t.is_string()) {
            s.name = t.get<std::string>();
          } else {
            s.name = t.at("name").get<std::string>();
            if (t.contains("mesh")) s.mesh = detail::resolve(base_dir, t["mesh"].get<std::string>());
            if (t.contains("sidecar")) s.sidecar = detail::resolve(base_dir, t["sidecar"].get<std::string>());
          }
          c.targets.push_back(std::move(s));
        }
      } else if (key == "routes") {
        c.routes.clear();
        if (v.is_string() && v.get<std::string>() == "all") c.routes = all_routes();
        else if (v.is_array())
          for (const auto& r : v) c.routes.push_back(parse_route(r.get<std::string>()));
        else throw ConfigError("routes must be \"all\" or an array of route names");
      } else if (key == "speed_mps") c.speed_mps = v.get<double>();
      else if (key == "duration_s") c.duration_s = v.get<double>();
      else if (key == "frame_dt_s") c.frame_dt_s = v.get<double>();
      else if (key == "junction") c.junction = detail::junction_from_json(v);
      else if (key == "radar") c.radar = radar_params_from_json(v);
      else if (key == "snr_db") c.snr_ladder_db = detail::number_list(v, "snr_db");
      else if (key == "wind_mps") c.wind_ladder_mps = detail::number_list(v, "wind_mps");
      else if (key == "sigma0_mean_db") c.sigma0_mean_db = v.get<double>();
      else if (key == "window") c.window = parse_window(v.get<std::string>());
      else if (key == "omega_min_radps") c.omega_min = v.get<double>();
      else if (key == "drop_first_cpi") c.drop_first_cpi = v.get<bool>();
      else if (key == "trim_outside_beam") c.trim_outside_beam = v.get<bool>();
      else if (key == "max_cpis") {
        if (!v.is_null()) c.max_cpis = v.get<std::size_t>();
      } else if (key == "output") {
        for (const auto& [ok, ov] : v.items()) {
          if (ok == "f32") c.output.f32 = parse_f32_output(ov.get<std::string>());
          else if (ok == "png_compression") c.output.png_compression = ov.get<int>();
          else throw ConfigError("unknown output key '" + ok + "'");
        }
      } else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Normalised form (all keys, defaults filled in). Used for the config hash.
inline nlohmann::json dataset_config_to_json(const DatasetConfig& c) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : c.targets) {
    nlohmann::json tj{{"name", t.name}};
    if (t.mesh) tj["mesh"] = t.mesh->generic_string();
    if (t.sidecar) tj["sidecar"] = t.sidecar->generic_string();
    targets.push_back(tj);
  }
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& r : c.routes) routes.push_back(route_name(r));
  nlohmann::json j{{"targets", targets},
                   {"routes", routes},
                   {"speed_mps", c.speed_mps},
                   {"duration_s", c.duration_s},
                   {"frame_dt_s", c.frame_dt_s},
                   {"junction", detail::junction_to_json(c.junction)},
                   {"radar", radar_params_to_json(c.radar)},
                   {"snr_db", c.snr_ladder_db},
                   {"wind_mps", c.wind_ladder_mps},
                   {"sigma0_mean_db", c.sigma0_mean_db},
                   {"window", window_name(c.window)},
                   {"omega_min_radps", c.omega_min},
                   {"drop_first_cpi", c.drop_first_cpi},
                   {"trim_outside_beam", c.trim_outside_beam},
                   {"output", {{"f32", f32_output_name(c.output.f32)}, {"png_compression", c.output.png_compression}}},
                   {"seed", c.seed}};
  j["max_cpis"] = c.max_cpis ? nlohmann::json(*c.max_cpis) : nlohmann::json(nullptr);
  return j;
}

inline std::string config_hash(const DatasetConfig& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(dataset_config_to_json(c).dump());
  return os.str();
}

inline DatasetConfig load_dataset_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return dataset_config_from_json(j, path.parent_path());
}

/// Load the mesh for a target. Built-in names are generated in memory.
inline FacetMesh load_target(const TargetSpec& t) {
  FacetMesh mesh;
  if (t.mesh) {
    if (!std::filesystem::exists(*t.mesh))
      throw ConfigError("target '" + t.name + "': mesh " + t.mesh->string() + " not found");
    mesh = t.sidecar ? load_mesh(*t.mesh, load_part_map(*t.sidecar)) : load_mesh(*t.mesh);
  } else {
    mesh = make_vehicle(t.name).mesh();
  }
  if (mesh.name != t.name)
    throw ConfigError("target '" + t.name + "': mesh is labelled '" + mesh.name + "'");
  return mesh;
}

}  // namespace isarforge
