#pragma once

// Procedural vehicle fleet. Each model is built from flat panels, tubes and
// wheel cylinders, then padded with small underside triangles to an exact
// facet count. Vehicle frame: length along +x (forward), width along y, z up,
// ground at z = 0.
//
// Side panels are refined near their front and rear ends so the extremities of
// the vehicle keep a broad specular response when seen side-on.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isarforge/core.hpp"
#include "isarforge/mesh.hpp"

namespace isarforge {

class MeshBuilder {
 public:
  std::vector<Triangle>& triangles() { return tris_; }
  std::size_t size() const { return tris_.size(); }

  void tri(const Vec3& a, const Vec3& b, const Vec3& c, const std::string& group) {
    tris_.push_back({a, b, c, group});
  }

  /// Bilinear patch p00-p10-p11-p01 split at fractional breaks along u and v.
  void patch(const Vec3& p00, const Vec3& p10, const Vec3& p01, const Vec3& p11, const std::vector<double>& ub,
             const std::vector<double>& vb, const std::string& group) {
    auto at = [&](double u, double v) {
      return p00 * ((1 - u) * (1 - v)) + p10 * (u * (1 - v)) + p01 * ((1 - u) * v) + p11 * (u * v);
    };
    for (std::size_t i = 0; i + 1 < ub.size(); ++i)
      for (std::size_t j = 0; j + 1 < vb.size(); ++j) {
        const Vec3 a = at(ub[i], vb[j]), b = at(ub[i + 1], vb[j]), c = at(ub[i + 1], vb[j + 1]),
                   d = at(ub[i], vb[j + 1]);
        // Alternate the diagonal so panels do not get a preferred direction.
        if ((i + j) % 2 == 0) {
          tri(a, b, c, group);
          tri(a, c, d, group);
        } else {
          tri(a, b, d, group);
          tri(b, c, d, group);
        }
      }
  }

  /// Open cylinder from a to b.
  void tube(const Vec3& a, const Vec3& b, double radius, int segments, int rings, const std::string& group) {
    const Vec3 axis = (b - a).normalized();
    const Vec3 helper = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    const Vec3 e1 = cross(axis, helper).normalized();
    const Vec3 e2 = cross(axis, e1);
    auto ring = [&](int k, int s) {
      const double ang = kTwoPi * s / segments;
      return a + (b - a) * (static_cast<double>(k) / rings) + (e1 * std::cos(ang) + e2 * std::sin(ang)) * radius;
    };
    for (int k = 0; k < rings; ++k)
      for (int s = 0; s < segments; ++s) {
        const Vec3 p0 = ring(k, s), p1 = ring(k, s + 1), p2 = ring(k + 1, s + 1), p3 = ring(k + 1, s);
        tri(p0, p1, p2, group);
        tri(p0, p2, p3, group);
      }
  }

  /// Wheel with axle along y: tread split into `rows` bands plus two side discs.
  void wheel(const Vec3& c, double radius, double width, int segments, int rows, int disc_rings,
             const std::string& group) {
    const double y0 = c.y - 0.5 * width;
    auto rim = [&](int s, double y, double r) {
      const double ang = kTwoPi * s / segments;
      return Vec3{c.x + r * std::cos(ang), y, c.z + r * std::sin(ang)};
    };
    for (int k = 0; k < rows; ++k) {
      const double ya = y0 + width * k / rows, yb = y0 + width * (k + 1) / rows;
      for (int s = 0; s < segments; ++s) {
        tri(rim(s, ya, radius), rim(s + 1, ya, radius), rim(s + 1, yb, radius), group);
        tri(rim(s, ya, radius), rim(s + 1, yb, radius), rim(s, yb, radius), group);
      }
    }
    for (double y : {y0, y0 + width}) {
      const Vec3 hub{c.x, y, c.z};
      for (int ringi = 0; ringi < disc_rings; ++ringi) {
        const double r0 = radius * ringi / disc_rings, r1 = radius * (ringi + 1) / disc_rings;
        for (int s = 0; s < segments; ++s) {
          if (ringi == 0) {
            tri(hub, rim(s, y, r1), rim(s + 1, y, r1), group);
          } else {
            tri(rim(s, y, r0), rim(s, y, r1), rim(s + 1, y, r1), group);
            tri(rim(s, y, r0), rim(s + 1, y, r1), rim(s + 1, y, r0), group);
          }
        }
      }
    }
  }

  /// Fill up to `target` facets with small downward-facing triangles spread
  /// over the rectangle [x0, x1] x [y0, y1] at height z.
  void pad(std::size_t target, double x0, double x1, double y0, double y1, double z, const std::string& group) {
    if (tris_.size() > target)
      throw ValidationError("procedural mesh already has " + std::to_string(tris_.size()) + " facets, target " +
                            std::to_string(target));
    const std::size_t need = target - tris_.size();
    if (need == 0) return;
    const std::size_t cells = (need + 1) / 2;
    const auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(cells * (x1 - x0) / (y1 - y0))));
    const std::size_t ny = (cells + nx - 1) / nx;
    const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
    std::size_t added = 0;
    for (std::size_t i = 0; i < nx && added < need; ++i)
      for (std::size_t j = 0; j < ny && added < need; ++j) {
        const Vec3 a{x0 + i * dx, y0 + j * dy, z}, b{x0 + (i + 1) * dx, y0 + j * dy, z},
            c{x0 + (i + 1) * dx, y0 + (j + 1) * dy, z}, d{x0 + i * dx, y0 + (j + 1) * dy, z};
        tri(a, c, b, group);
        if (++added < need) {
          tri(a, d, c, group);
          ++added;
        }
      }
  }

 private:
  std::vector<Triangle> tris_;
};

/// Fractional breaks 0..1 with n equal steps.
inline std::vector<double> uniform_breaks(int n) {
  std::vector<double> b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = static_cast<double>(i) / n;
  return b;
}

/// Breaks for a span split into fine end bands and a coarse middle (fractions
/// of `length`; steps in metres).
inline std::vector<double> banded_breaks(double length, double band, double fine, double coarse) {
  band = std::min(band, 0.5 * length);
  const int nb = std::max(1, static_cast<int>(std::ceil(band / fine)));
  const double mid = length - 2.0 * band;
  const int nm = mid > 1e-9 ? std::max(1, static_cast<int>(std::ceil(mid / coarse))) : 0;
  std::vector<double> b{0.0};
  for (int i = 1; i <= nb; ++i) b.push_back(band * i / nb / length);
  for (int i = 1; i <= nm; ++i) b.push_back((band + mid * i / nm) / length);
  for (int i = 1; i <= nb; ++i) b.push_back((length - band + band * i / nb) / length);
  return b;
}

/// Box tessellation. Side panels (normals +-y) get fine end bands.
struct BoxTess {
  double band = 0.2;    ///< length of the refined band at each end of a side panel
  double fine = 0.035;  ///< facet leg inside the bands
  double coarse = 0.4;  ///< facet leg elsewhere
  double band_height = 0.0;  ///< refined strip height at the panel bottom; 0 refines the full height
  bool band_front = true;
  bool band_back = true;
  bool top = true;
  bool bottom = false;
  bool front = true;
  bool back = true;
};

inline void add_box(MeshBuilder& mb, const Vec3& lo, const Vec3& hi, const BoxTess& t, const std::string& group) {
  const double lx = hi.x - lo.x, ly = hi.y - lo.y, lz = hi.z - lo.z;
  const auto coarse = [&](double len) { return uniform_breaks(std::max(1, static_cast<int>(std::ceil(len / t.coarse)))); };
  const auto fine = [&](double len) { return uniform_breaks(std::max(1, static_cast<int>(std::ceil(len / t.fine)))); };
  for (double y : {lo.y, hi.y}) {
    const double band = std::min(t.band, 0.5 * lx);
    // rear band, middle, front band
    const double xs[4] = {lo.x, t.band_back ? lo.x + band : lo.x, t.band_front ? hi.x - band : hi.x, hi.x};
    for (int seg = 0; seg < 3; ++seg) {
      const double a = xs[seg], b = xs[seg + 1];
      if (b - a < 1e-9) continue;
      if (seg == 1) {
        mb.patch({a, y, lo.z}, {b, y, lo.z}, {a, y, hi.z}, {b, y, hi.z}, coarse(b - a), coarse(lz), group);
        continue;
      }
      const double zs = t.band_height > 0.0 ? std::min(hi.z, lo.z + t.band_height) : hi.z;
      mb.patch({a, y, lo.z}, {b, y, lo.z}, {a, y, zs}, {b, y, zs}, fine(b - a), fine(zs - lo.z), group);
      if (hi.z - zs > 1e-9)
        mb.patch({a, y, zs}, {b, y, zs}, {a, y, hi.z}, {b, y, hi.z}, coarse(b - a), coarse(hi.z - zs), group);
    }
  }
  for (double x : {lo.x, hi.x}) {
    if ((x == lo.x && !t.back) || (x == hi.x && !t.front)) continue;
    mb.patch({x, lo.y, lo.z}, {x, hi.y, lo.z}, {x, lo.y, hi.z}, {x, hi.y, hi.z}, coarse(ly), coarse(lz), group);
  }
  for (double z : {lo.z, hi.z}) {
    if ((z == lo.z && !t.bottom) || (z == hi.z && !t.top)) continue;
    mb.patch({lo.x, lo.y, z}, {hi.x, lo.y, z}, {lo.x, hi.y, z}, {hi.x, hi.y, z}, coarse(lx), coarse(ly), group);
  }
}

/// Mesh plus the labelling that goes into its sidecar.
struct VehicleModel {
  std::vector<Triangle> triangles;
  PartMap parts;

  FacetMesh mesh() const { return build_mesh(triangles, parts); }
};

struct VehicleWheel {
  Vec3 center;
  double radius;
  double width;
};

namespace detail {

inline void add_wheels(MeshBuilder& mb, VehicleModel& v, const std::vector<VehicleWheel>& wheels, int segments,
                       int rows, int disc_rings) {
  for (std::size_t i = 0; i < wheels.size(); ++i) {
    const auto& w = wheels[i];
    const std::string g = "wheel_" + std::to_string(i);
    mb.wheel(w.center, w.radius, w.width, segments, rows, disc_rings, g);
    v.parts.wheels.push_back({static_cast<int>(i), w.center, w.radius, g, w.width});
  }
}

inline VehicleModel finish(MeshBuilder& mb, VehicleModel v, std::size_t target, double length, double width,
                           double pad_z, double center_z) {
  mb.pad(target, -0.3 * length, 0.3 * length, -0.3 * width, 0.3 * width, pad_z, "underbody");
  v.triangles = std::move(mb.triangles());
  v.parts.center = Vec3{0.0, 0.0, center_z};
  return v;
}

}  // namespace detail

inline constexpr std::size_t kBicycleFacets = 3919;
inline constexpr std::size_t kAutoRickshawFacets = 6949;
inline constexpr std::size_t kMidsizeFacets = 6905;
inline constexpr std::size_t kFullsizeFacets = 19964;
inline constexpr std::size_t kTruckFacets = 7206;

/// Bicycle, 1.75 m x 0.6 m, no rider.
inline VehicleModel make_bicycle() {
  MeshBuilder mb;
  VehicleModel v;
  v.parts.label = "bicycle";
  const double r = 0.34, hub_x = 0.52;
  const Vec3 rear{-hub_x, 0, r}, front{hub_x, 0, r};
  const Vec3 bb{-0.05, 0, 0.30}, seat{-0.22, 0, 0.85}, head{0.40, 0, 0.88}, head_low{0.43, 0, 0.72};
  const int seg = 10;
  mb.tube(bb, seat, 0.018, seg, 10, "frame");
  mb.tube(seat, head, 0.016, seg, 14, "frame");
  mb.tube(bb, head_low, 0.02, seg, 14, "frame");
  mb.tube(head_low, head, 0.022, seg, 4, "frame");
  for (double y : {-0.06, 0.06}) {
    mb.tube({rear.x, y, rear.z}, {bb.x, y * 0.5, bb.z}, 0.01, 8, 10, "frame");
    mb.tube({rear.x, y, rear.z}, {seat.x, y * 0.5, seat.z - 0.05}, 0.009, 8, 12, "frame");
    mb.tube({front.x, y, front.z}, {head_low.x, y * 0.5, head_low.z}, 0.012, 8, 10, "fork");
  }
  mb.tube({head.x - 0.02, -0.3, head.z + 0.1}, {head.x - 0.02, 0.3, head.z + 0.1}, 0.012, 10, 16, "handlebar");
  mb.tube(head, {head.x - 0.02, 0, head.z + 0.1}, 0.014, 8, 3, "handlebar");
  add_box(mb, {seat.x - 0.14, -0.08, seat.z + 0.02}, {seat.x + 0.1, 0.08, seat.z + 0.07},
          {.band = 0.05, .fine = 0.02, .coarse = 0.05, .bottom = true}, "saddle");
  detail::add_wheels(mb, v, {{rear, r, 0.035}, {front, r, 0.035}}, 40, 2, 4);
  return detail::finish(mb, std::move(v), kBicycleFacets, 1.0, 0.1, 0.30, r);
}

/// Three-wheeled auto-rickshaw, 2.6 m x 1.3 m, tapered nose.
inline VehicleModel make_auto_rickshaw() {
  MeshBuilder mb;
  VehicleModel v;
  v.parts.label = "auto_rickshaw";
  const double L = 2.6, W = 1.3;
  const double x_rear = -L / 2, x_shoulder = 0.35, x_nose = L / 2;
  const double z0 = 0.3, z_body = 0.95, z_roof = 1.7;
  BoxTess cabin{.band = 0.18, .fine = 0.04, .coarse = 0.3};
  add_box(mb, {x_rear, -W / 2, z0}, {x_shoulder, W / 2, z_body}, cabin, "body");
  add_box(mb, {x_rear, -W / 2 + 0.02, z_roof - 0.06}, {x_shoulder + 0.25, W / 2 - 0.02, z_roof},
          {.band = 0.15, .fine = 0.05, .coarse = 0.3, .bottom = true}, "canopy");
  // Canopy posts.
  for (double x : {x_rear + 0.05, x_shoulder - 0.05})
    for (double y : {-W / 2 + 0.05, W / 2 - 0.05}) mb.tube({x, y, z_body}, {x, y, z_roof - 0.06}, 0.02, 8, 8, "frame");
  // Nose: trapezoid in top view narrowing from W to 0.35 m.
  const double wn = 0.35;
  const auto ub = banded_breaks(x_nose - x_shoulder, 0.15, 0.04, 0.25);
  const auto vb = uniform_breaks(16);
  for (double s : {-1.0, 1.0}) {
    mb.patch({x_shoulder, s * W / 2, z0}, {x_nose, s * wn / 2, z0}, {x_shoulder, s * W / 2, z_body},
             {x_nose, s * wn / 2, z_body + 0.1}, ub, vb, "nose");
  }
  mb.patch({x_nose, -wn / 2, z0}, {x_nose, wn / 2, z0}, {x_nose, -wn / 2, z_body + 0.1}, {x_nose, wn / 2, z_body + 0.1},
           uniform_breaks(6), uniform_breaks(10), "nose");
  mb.patch({x_shoulder, -W / 2, z_body}, {x_nose, -wn / 2, z_body + 0.1}, {x_shoulder, W / 2, z_body},
           {x_nose, wn / 2, z_body + 0.1}, uniform_breaks(8), uniform_breaks(8), "nose");
  // Windscreen.
  mb.patch({x_shoulder, -W / 2 + 0.05, z_body}, {x_shoulder, W / 2 - 0.05, z_body}, {x_shoulder + 0.2, -W / 2 + 0.08, z_roof - 0.06},
           {x_shoulder + 0.2, W / 2 - 0.08, z_roof - 0.06}, uniform_breaks(16), uniform_breaks(10), "windscreen");
  const double r = 0.2;
  detail::add_wheels(mb, v, {{{x_nose - 0.2, 0, r}, r, 0.1}, {{x_rear + 0.35, -0.55, r}, r, 0.12}, {{x_rear + 0.35, 0.55, r}, r, 0.12}},
                     40, 4, 4);
  return detail::finish(mb, std::move(v), kAutoRickshawFacets, L, W, z0 - 0.001, 0.5);
}

namespace detail {

/// Saloon shape: lower body box plus a narrower greenhouse, four wheels.
inline VehicleModel make_car(const std::string& label, std::size_t target, double L, double W, double H,
                             double wheel_r, double fine, double coarse, int wheel_seg, int wheel_rows, int disc_rings) {
  MeshBuilder mb;
  VehicleModel v;
  v.parts.label = label;
  const double z0 = 0.25, z_belt = 0.55 * H + 0.1;
  add_box(mb, {-L / 2, -W / 2, z0}, {L / 2, W / 2, z_belt}, {.band = 0.2, .fine = fine, .coarse = coarse}, "body");
  const double gl = 0.55 * L;
  const double gx0 = -0.3 * L, gx1 = gx0 + gl;
  const double inset = 0.06 * W;
  add_box(mb, {gx0, -W / 2 + inset, z_belt}, {gx1, W / 2 - inset, H}, {.band = 0.15, .fine = fine * 1.3, .coarse = coarse},
          "cabin");
  const double wx = 0.34 * L;
  const double wy = W / 2 - 0.12;
  detail::add_wheels(mb, v,
                     {{{wx, -wy, wheel_r}, wheel_r, 0.2},
                      {{wx, wy, wheel_r}, wheel_r, 0.2},
                      {{-wx, -wy, wheel_r}, wheel_r, 0.2},
                      {{-wx, wy, wheel_r}, wheel_r, 0.2}},
                     wheel_seg, wheel_rows, disc_rings);
  return detail::finish(mb, std::move(v), target, L, W, z0 - 0.001, 0.5 * (z0 + z_belt));
}

}  // namespace detail

/// Mid-size car, 4.4 m x 1.7 m.
inline VehicleModel make_midsize_car() {
  return detail::make_car("midsize_car", kMidsizeFacets, 4.4, 1.7, 1.45, 0.31, 0.05, 0.35, 32, 3, 3);
}

/// Full-size car, 5.7 m x 2.4 m.
inline VehicleModel make_fullsize_car() {
  return detail::make_car("fullsize_car", kFullsizeFacets, 5.7, 2.4, 1.8, 0.38, 0.03, 0.2, 48, 6, 6);
}

/// Four-wheel truck, 8.5 m x 2.6 m: cab plus cargo box.
inline VehicleModel make_truck() {
  MeshBuilder mb;
  VehicleModel v;
  v.parts.label = "truck";
  const double L = 8.5, W = 2.6;
  const double x_rear = -L / 2, x_front = L / 2, cab_len = 2.1, gap = 0.15;
  const double z_frame = 1.0;
  BoxTess box{.band = 0.12, .fine = 0.017, .coarse = 0.7, .band_height = 0.6, .band_front = false};
  add_box(mb, {x_rear, -W / 2, z_frame}, {x_front - cab_len - gap, W / 2, 3.6}, box, "cargo");
  BoxTess cab{.band = 0.12, .fine = 0.017, .coarse = 0.6, .band_height = 0.6, .band_back = false};
  add_box(mb, {x_front - cab_len, -W / 2, z_frame}, {x_front, W / 2, 3.0}, cab, "cab");
  const double r = 0.5;
  detail::add_wheels(mb, v,
                     {{{x_front - 1.2, -1.0, r}, r, 0.35},
                      {{x_front - 1.2, 1.0, r}, r, 0.35},
                      {{x_rear + 1.6, -1.0, r}, r, 0.35},
                      {{x_rear + 1.6, 1.0, r}, r, 0.35}},
                     36, 2, 3);
  return detail::finish(mb, std::move(v), kTruckFacets, L, W, z_frame - 0.001, 1.0);
}

inline std::vector<std::string> fleet_names() {
  return {"bicycle", "auto_rickshaw", "midsize_car", "fullsize_car", "truck"};
}

inline VehicleModel make_vehicle(const std::string& name) {
  if (name == "bicycle") return make_bicycle();
  if (name == "auto_rickshaw") return make_auto_rickshaw();
  if (name == "midsize_car") return make_midsize_car();
  if (name == "fullsize_car") return make_fullsize_car();
  if (name == "truck") return make_truck();
  throw ConfigError("unknown built-in vehicle '" + name + "'");
}

}  // namespace isarforge
