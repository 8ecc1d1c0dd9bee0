#pragma once

// Triangulated vehicle meshes: loading, per-facet precomputation, validation.
//
// File format: Wavefront-style ASCII restricted to triangles
//   v x y z        vertex (meters, right-handed, Z up)
//   f i j k        triangle, 1-based (negative = relative) indices; "i/t/n" accepted
//   g name | o name  starts a named group
// Everything else recognised by OBJ readers (vn, vt, s, usemtl, mtllib) is ignored.
//
// Sidecar (JSON):
//   {"label": "truck", "center": [x,y,z]?, "heading_deg": 0?,
//    "wheels": [{"group": "wheel_fl", "center": [x,y,z], "radius": r, "width": w?}]}
// A wheel with "width" and no "group" claims every facet whose centroid lies in its
// bounding cylinder (axle along body +y).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isarforge/core.hpp"

namespace isarforge {

inline constexpr double kDegenerateAreaM2 = 1e-12;

/// Facet ownership: the rigid chassis or one of the wheels.
struct Part {
  int wheel_id = -1;  ///< -1 for chassis

  bool is_wheel() const { return wheel_id >= 0; }
  static Part chassis() { return {}; }
  static Part wheel(int id) { return {id}; }
  bool operator==(const Part&) const = default;
};

struct Facet {
  std::array<Vec3, 3> vertices;
  Vec3 centroid;
  Vec3 normal;          ///< unit, right-hand winding
  double area = 0.0;    ///< m^2
  double longest_edge = 0.0;  ///< m
  Part part;
  std::string group;
};

struct WheelSpec {
  int wheel_id = 0;
  Vec3 center;   ///< vehicle frame
  double radius = 0.0;
  std::string group;  ///< empty when matched by bounding cylinder
  std::optional<double> width;
};

/// Labelling rules applied at load time.
struct PartMap {
  std::string label;
  std::optional<Vec3> center;
  double heading = 0.0;  ///< native heading of the model (rad), +x by default
  std::vector<WheelSpec> wheels;
};

struct FacetMesh {
  std::string name;  ///< target class label
  std::vector<Facet> facets;
  std::vector<WheelSpec> wheels;
  Vec3 center;
  std::vector<Vec3> offsets;  ///< centroid - center, per facet
  double native_heading = 0.0;

  std::size_t size() const { return facets.size(); }

  const WheelSpec* find_wheel(int id) const {
    for (const auto& w : wheels)
      if (w.wheel_id == id) return &w;
    return nullptr;
  }

  double total_area() const {
    double a = 0.0;
    for (const auto& f : facets) a += f.area;
    return a;
  }

  /// Axis-aligned bounds of all vertices in the vehicle frame.
  std::pair<Vec3, Vec3> bounds() const {
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& f : facets)
      for (const auto& v : f.vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
      }
    return {lo, hi};
  }
};

/// Geometry of a single triangle. Normal is left zero for degenerate input.
inline Facet make_facet(const Vec3& a, const Vec3& b, const Vec3& c) {
  Facet f;
  f.vertices = {a, b, c};
  f.centroid = (a + b + c) / 3.0;
  const Vec3 n = cross(b - a, c - a);
  const double twice_area = n.norm();
  f.area = 0.5 * twice_area;
  if (twice_area > 0.0) f.normal = n / twice_area;
  f.longest_edge = std::max({distance(a, b), distance(b, c), distance(c, a)});
  return f;
}

namespace detail {

inline bool is_wheel_group(const std::string& g) {
  std::string lower(g.size(), ' ');
  std::transform(g.begin(), g.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return lower.rfind("wheel", 0) == 0;
}

inline bool in_wheel_cylinder(const WheelSpec& w, const Vec3& p) {
  if (!w.width) return false;
  const Vec3 d = p - w.center;
  return std::hypot(d.x, d.z) <= w.radius * (1.0 + 1e-9) && std::abs(d.y) <= 0.5 * *w.width + 1e-9;
}

}  // namespace detail

struct Triangle {
  Vec3 a, b, c;
  std::string group;
};

/// Assemble a FacetMesh from raw triangles. Throws ValidationError on degenerate
/// triangles or wheel groups without a matching WheelSpec.
inline FacetMesh build_mesh(const std::vector<Triangle>& tris, const PartMap& parts) {
  if (tris.empty()) throw ValidationError("mesh has no facets");
  FacetMesh mesh;
  mesh.name = parts.label;
  mesh.wheels = parts.wheels;
  mesh.native_heading = parts.heading;
  mesh.facets.reserve(tris.size());
  for (std::size_t i = 0; i < tris.size(); ++i) {
    Facet f = make_facet(tris[i].a, tris[i].b, tris[i].c);
    if (!(f.area >= kDegenerateAreaM2))
      throw ValidationError("degenerate triangle at facet index " + std::to_string(i) +
                            " (area " + std::to_string(f.area) + " m^2)");
    f.group = tris[i].group;
    if (detail::is_wheel_group(f.group)) {
      auto it = std::find_if(parts.wheels.begin(), parts.wheels.end(),
                             [&](const WheelSpec& w) { return w.group == f.group; });
      if (it == parts.wheels.end())
        throw ValidationError("facet " + std::to_string(i) + " in group '" + f.group +
                              "' has no wheel spec");
      f.part = Part::wheel(it->wheel_id);
    } else {
      for (const auto& w : parts.wheels)
        if (w.group.empty() && detail::in_wheel_cylinder(w, f.centroid)) {
          f.part = Part::wheel(w.wheel_id);
          break;
        }
    }
    mesh.facets.push_back(std::move(f));
  }
  if (parts.center) {
    mesh.center = *parts.center;
  } else {
    Vec3 sum;
    for (const auto& f : mesh.facets) sum += f.centroid;
    mesh.center = sum / static_cast<double>(mesh.facets.size());
  }
  mesh.offsets.reserve(mesh.facets.size());
  for (const auto& f : mesh.facets) mesh.offsets.push_back(f.centroid - mesh.center);
  return mesh;
}

/// Parse the triangle-list format from a stream.
inline std::vector<Triangle> parse_triangles(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::string group = "default";
  std::string line;
  std::size_t lineno = 0;
  auto parse_index = [&](const std::string& tok) -> std::size_t {
    const std::string head = tok.substr(0, tok.find('/'));
    long idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stol(head, &used);
      if (used != head.size()) throw std::invalid_argument(head);
    } catch (const std::exception&) {
      throw ParseError("bad face index '" + tok + "'", lineno);
    }
    const long n = static_cast<long>(verts.size());
    const long resolved = idx > 0 ? idx - 1 : n + idx;
    if (idx == 0 || resolved < 0 || resolved >= n)
      throw ParseError("face index " + std::to_string(idx) + " out of range", lineno);
    return static_cast<std::size_t>(resolved);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError("vertex needs three coordinates", lineno);
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
        throw ParseError("non-finite vertex coordinate", lineno);
      verts.emplace_back(x, y, z);
    } else if (key == "f") {
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.size() != 3)
        throw ParseError("only triangles are supported, got " + std::to_string(toks.size()) +
                             " vertices",
                         lineno);
      tris.push_back({verts[parse_index(toks[0])], verts[parse_index(toks[1])],
                      verts[parse_index(toks[2])], group});
    } else if (key == "g" || key == "o") {
      std::string name;
      if (!(ls >> name)) throw ParseError("group without a name", lineno);
      group = name;
    } else if (key == "vn" || key == "vt" || key == "s" || key == "usemtl" || key == "mtllib") {
      continue;
    } else {
      throw ParseError("unknown record '" + key + "'", lineno);
    }
  }
  return tris;
}

namespace detail {
inline Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
}  // namespace detail

inline PartMap parse_part_map(const nlohmann::json& j) {
  PartMap pm;
  pm.label = j.value("label", std::string{});
  if (j.contains("center") && !j["center"].is_null())
    pm.center = detail::vec3_from_json(j["center"], "center");
  pm.heading = deg_to_rad(j.value("heading_deg", 0.0));
  int next_id = 0;
  for (const auto& w : j.value("wheels", nlohmann::json::array())) {
    WheelSpec spec;
    spec.wheel_id = w.value("id", next_id);
    next_id = spec.wheel_id + 1;
    spec.group = w.value("group", std::string{});
    spec.center = detail::vec3_from_json(w.at("center"), "wheel center");
    spec.radius = w.at("radius").get<double>();
    if (w.contains("width")) spec.width = w["width"].get<double>();
    if (!(spec.radius > 0.0))
      throw ConfigError("wheel '" + spec.group + "' radius must be positive");
    if (spec.group.empty() && !spec.width)
      throw ConfigError("wheel without group needs a width for cylinder matching");
    pm.wheels.push_back(std::move(spec));
  }
  return pm;
}

inline nlohmann::json part_map_to_json(const PartMap& pm) {
  nlohmann::json j;
  j["label"] = pm.label;
  if (pm.center) j["center"] = {pm.center->x, pm.center->y, pm.center->z};
  if (pm.heading != 0.0) j["heading_deg"] = rad_to_deg(pm.heading);
  j["wheels"] = nlohmann::json::array();
  for (const auto& w : pm.wheels) {
    nlohmann::json wj{{"id", w.wheel_id},
                      {"center", {w.center.x, w.center.y, w.center.z}},
                      {"radius", w.radius}};
    if (!w.group.empty()) wj["group"] = w.group;
    if (w.width) wj["width"] = *w.width;
    j["wheels"].push_back(wj);
  }
  return j;
}

inline PartMap load_part_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sidecar " + path.string());
  try {
    return parse_part_map(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("sidecar " + path.string() + ": " + e.what());
  }
}

/// Sidecar next to a mesh: same stem, ".json".
inline std::filesystem::path default_sidecar_path(const std::filesystem::path& mesh_path) {
  auto p = mesh_path;
  p.replace_extension(".json");
  return p;
}

inline FacetMesh load_mesh(const std::filesystem::path& path, const PartMap& parts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh " + path.string());
  PartMap pm = parts;
  if (pm.label.empty()) pm.label = path.stem().string();
  return build_mesh(parse_triangles(in), pm);
}

/// Load a mesh together with its sidecar (if one exists next to it).
inline FacetMesh load_mesh(const std::filesystem::path& path) {
  const auto side = default_sidecar_path(path);
  PartMap pm;
  if (std::filesystem::exists(side)) pm = load_part_map(side);
  return load_mesh(path, pm);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct MeshFinding {
  enum class Kind { kEmpty, kArea, kNormal, kCentroid, kLongestEdge, kOffset, kWheelSpec, kWheelRadius };
  Kind kind;
  long index = -1;  ///< facet index, or wheel id for wheel findings
  std::string message;
};

struct MeshReport {
  std::vector<MeshFinding> findings;
  bool ok() const { return findings.empty(); }
};

inline MeshReport validate_mesh(const FacetMesh& mesh) {
  MeshReport rep;
  auto add = [&](MeshFinding::Kind k, long idx, std::string msg) {
    rep.findings.push_back({k, idx, std::move(msg)});
  };
  if (mesh.facets.empty()) add(MeshFinding::Kind::kEmpty, -1, "mesh has no facets");
  for (const auto& w : mesh.wheels)
    if (!(w.radius > 0.0))
      add(MeshFinding::Kind::kWheelRadius, w.wheel_id,
          "wheel " + std::to_string(w.wheel_id) + " has non-positive radius");
  for (std::size_t i = 0; i < mesh.facets.size(); ++i) {
    const auto& f = mesh.facets[i];
    const long li = static_cast<long>(i);
    const auto& v = f.vertices;
    if (!(f.area > 0.0) || f.area < kDegenerateAreaM2)
      add(MeshFinding::Kind::kArea, li, "facet " + std::to_string(i) + " has degenerate area");
    if (std::abs(f.normal.norm() - 1.0) > 1e-9)
      add(MeshFinding::Kind::kNormal, li, "facet " + std::to_string(i) + " normal is not unit");
    if (distance(f.centroid, (v[0] + v[1] + v[2]) / 3.0) > 1e-9)
      add(MeshFinding::Kind::kCentroid, li, "facet " + std::to_string(i) + " centroid mismatch");
    const double edge = std::max({distance(v[0], v[1]), distance(v[1], v[2]), distance(v[2], v[0])});
    if (!(f.longest_edge > 0.0) || std::abs(f.longest_edge - edge) > 1e-9)
      add(MeshFinding::Kind::kLongestEdge, li,
          "facet " + std::to_string(i) + " longest edge mismatch");
    if (i >= mesh.offsets.size() || distance(mesh.center + mesh.offsets[i], f.centroid) > 1e-9)
      add(MeshFinding::Kind::kOffset, li, "facet " + std::to_string(i) + " offset mismatch");
    if (f.part.is_wheel() && !mesh.find_wheel(f.part.wheel_id))
      add(MeshFinding::Kind::kWheelSpec, f.part.wheel_id,
          "facet " + std::to_string(i) + " references wheel_id " +
              std::to_string(f.part.wheel_id) + " without a wheel spec");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

/// Write triangles grouped by Facet::group. Vertices are not shared.
inline void write_obj(std::ostream& out, const FacetMesh& mesh) {
  out << "# " << mesh.name << ": " << mesh.facets.size() << " facets\n";
  out << std::setprecision(9);
  std::string current;
  std::size_t next = 1;
  for (const auto& f : mesh.facets) {
    if (f.group != current || next == 1) {
      current = f.group;
      out << "g " << (current.empty() ? "default" : current) << '\n';
    }
    for (const auto& v : f.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    out << "f " << next << ' ' << next + 1 << ' ' << next + 2 << '\n';
    next += 3;
  }
}

}  // namespace isarforge
