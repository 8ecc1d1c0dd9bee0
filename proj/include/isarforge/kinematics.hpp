#pragma once

// Junction trajectories and rigid-body animation of a faceted vehicle.
//
// Road layout: four roads meet at the junction center; traffic keeps left, so a
// northbound vehicle drives on the west half of the south road. Right turns cross
// the junction on the wide radius, left turns hug the near corner, and U-turns are
// a half circle that joins the two opposing lanes across the median.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isarforge/core.hpp"
#include "isarforge/mesh.hpp"

namespace isarforge {

// ---------------------------------------------------------------------------
// Routes
// ---------------------------------------------------------------------------

enum class Approach { kSouth = 0, kEast = 1, kNorth = 2, kWest = 3 };
enum class Manoeuvre { kStraight, kRight, kLeft, kUTurn };

struct Route {
  Approach from = Approach::kSouth;
  Manoeuvre manoeuvre = Manoeuvre::kStraight;
  bool operator==(const Route&) const = default;
};

namespace detail {
inline constexpr std::array<char, 4> kApproachLetters{'S', 'E', 'N', 'W'};

/// Compass direction a route leaves through.
inline Approach exit_of(const Route& r) {
  const int k = static_cast<int>(r.from);
  switch (r.manoeuvre) {
    case Manoeuvre::kStraight: return static_cast<Approach>((k + 2) % 4);
    case Manoeuvre::kRight: return static_cast<Approach>((k + 1) % 4);
    case Manoeuvre::kLeft: return static_cast<Approach>((k + 3) % 4);
    case Manoeuvre::kUTurn: return r.from;
  }
  return r.from;
}
}  // namespace detail

inline std::string route_name(const Route& r) {
  std::string s;
  s += detail::kApproachLetters[static_cast<int>(r.from)];
  s += '2';
  s += detail::kApproachLetters[static_cast<int>(detail::exit_of(r))];
  return s;
}

inline Route parse_route(std::string_view name) {
  auto letter = [&](char c) -> int {
    for (int i = 0; i < 4; ++i)
      if (detail::kApproachLetters[i] == c) return i;
    return -1;
  };
  if (name.size() != 3 || name[1] != '2') throw ConfigError("unknown route '" + std::string(name) + "'");
  const int a = letter(name[0]), b = letter(name[2]);
  if (a < 0 || b < 0) throw ConfigError("unknown route '" + std::string(name) + "'");
  const int turn = ((b - a) % 4 + 4) % 4;
  static constexpr std::array<Manoeuvre, 4> kByTurn{Manoeuvre::kUTurn, Manoeuvre::kRight,
                                                    Manoeuvre::kStraight, Manoeuvre::kLeft};
  return {static_cast<Approach>(a), kByTurn[turn]};
}

/// All 16 routes: straight, right, left, U-turn groups.
inline std::vector<Route> all_routes() {
  std::vector<Route> out;
  for (auto m : {Manoeuvre::kStraight, Manoeuvre::kRight, Manoeuvre::kLeft, Manoeuvre::kUTurn}) {
    const std::array<Approach, 4> order =
        m == Manoeuvre::kStraight
            ? std::array<Approach, 4>{Approach::kSouth, Approach::kNorth, Approach::kWest, Approach::kEast}
            : std::array<Approach, 4>{Approach::kSouth, Approach::kEast, Approach::kNorth, Approach::kWest};
    for (auto a : order) out.push_back({a, m});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Junction geometry and paths
// ---------------------------------------------------------------------------

struct JunctionGeometry {
  Vec3 center{0.0, 30.0, 0.0};
  double lane_offset = 1.75;   ///< road center line to lane center
  double right_radius = 6.0;
  double left_radius = 4.0;
  double uturn_radius = 1.75;  ///< half circle across the median (= lane_offset joins the lanes)
};

/// Straight approach, optional circular arc, straight exit. Arc-length parameter s
/// is 0 where the approach meets the arc; the approach covers s < 0.
struct JunctionPath {
  Vec3 arc_start;        ///< end of approach leg
  double heading_in = 0.0;
  Vec3 arc_center;
  double radius = 0.0;
  double start_angle = 0.0;  ///< polar angle of arc_start about arc_center
  double sweep = 0.0;        ///< signed, CCW positive; 0 for straight routes
  double arc_length = 0.0;

  Vec3 point_at(double s) const {
    if (s <= 0.0 || arc_length == 0.0)
      return s <= 0.0 || arc_length == 0.0 ? arc_start + heading_vec(heading_in) * s : arc_start;
    if (s <= arc_length) {
      const double a = start_angle + std::copysign(s / radius, sweep);
      return arc_center + Vec3{radius * std::cos(a), radius * std::sin(a), 0.0};
    }
    const double a_end = start_angle + sweep;
    const Vec3 end = arc_center + Vec3{radius * std::cos(a_end), radius * std::sin(a_end), 0.0};
    return end + heading_vec(heading_in + sweep) * (s - arc_length);
  }

  /// Tangent heading (rad, unwrapped relative to heading_in).
  double heading_at(double s) const {
    if (arc_length == 0.0 || s <= 0.0) return heading_in;
    if (s >= arc_length) return heading_in + sweep;
    return heading_in + std::copysign(s / radius, sweep);
  }

  static Vec3 heading_vec(double h) { return {std::cos(h), std::sin(h), 0.0}; }
};

inline JunctionPath make_junction_path(const Route& route, const JunctionGeometry& g) {
  // Layout for a vehicle arriving from the south, junction center at origin.
  const double lo = g.lane_offset;
  JunctionPath p;
  p.heading_in = kPi / 2;
  switch (route.manoeuvre) {
    case Manoeuvre::kStraight:
      p.arc_start = {-lo, 0.0, 0.0};
      break;
    case Manoeuvre::kRight: {
      const double r = g.right_radius;
      p.arc_center = {-lo + r, lo - r, 0.0};
      p.radius = r;
      p.start_angle = kPi;
      p.sweep = -kPi / 2;
      break;
    }
    case Manoeuvre::kLeft: {
      const double r = g.left_radius;
      p.arc_center = {-lo - r, -lo - r, 0.0};
      p.radius = r;
      p.start_angle = 0.0;
      p.sweep = kPi / 2;
      break;
    }
    case Manoeuvre::kUTurn: {
      const double r = g.uturn_radius;
      p.arc_center = {-lo + r, 0.0, 0.0};
      p.radius = r;
      p.start_angle = kPi;
      p.sweep = -kPi;
      break;
    }
  }
  if (route.manoeuvre != Manoeuvre::kStraight) {
    p.arc_start = p.arc_center + Vec3{p.radius * std::cos(p.start_angle),
                                      p.radius * std::sin(p.start_angle), 0.0};
    p.arc_length = p.radius * std::abs(p.sweep);
  }
  // Rotate the south-approach layout onto the actual approach road.
  const double rot = static_cast<int>(route.from) * kPi / 2;
  const Mat3 r = Mat3::rot_z(rot);
  p.arc_start = g.center + r * p.arc_start;
  p.arc_center = g.center + r * p.arc_center;
  p.start_angle += rot;
  p.heading_in += rot;
  return p;
}

// ---------------------------------------------------------------------------
// Trajectory plan
// ---------------------------------------------------------------------------

struct TrajectoryOptions {
  JunctionGeometry junction;
  /// Distance travelled before the manoeuvre starts. When unset, the start is
  /// placed so that the middle of the manoeuvre happens at half the duration.
  std::optional<double> approach_m;
};

struct TrajectoryPlan {
  Route route;
  double speed = 0.0;     ///< m/s
  double frame_dt = 0.0;  ///< s
  double start_s = 0.0;   ///< path parameter of the first waypoint
  JunctionPath path;
  std::vector<Vec3> waypoints;  ///< vehicle center on the ground plane

  std::size_t frame_count() const { return waypoints.size(); }
  double duration() const { return frame_dt * static_cast<double>(waypoints.size() - 1); }
};

inline TrajectoryPlan make_trajectory(const Route& route, double speed, double duration,
                                      double frame_dt, const TrajectoryOptions& opts = {}) {
  if (!(speed > 0.0)) throw ConfigError("speed must be positive");
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (!(frame_dt > 0.0)) throw ConfigError("frame_dt must be positive");
  const auto frames = static_cast<std::size_t>(std::llround(duration / frame_dt)) + 1;
  if (frames < 2) throw ConfigError("trajectory needs at least two frames");

  TrajectoryPlan plan;
  plan.route = route;
  plan.speed = speed;
  plan.frame_dt = frame_dt;
  plan.path = make_junction_path(route, opts.junction);
  if (opts.approach_m) {
    const double need = *opts.approach_m / speed;
    if (duration < need)
      throw ConfigError("duration " + std::to_string(duration) +
                        " s is too short to reach the junction; minimum duration is " +
                        std::to_string(need) + " s");
    plan.start_s = -*opts.approach_m;
  } else {
    plan.start_s = 0.5 * plan.path.arc_length - 0.5 * speed * duration;
  }
  plan.waypoints.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f)
    plan.waypoints.push_back(
        plan.path.point_at(plan.start_s + speed * frame_dt * static_cast<double>(f)));
  return plan;
}

/// Four-quadrant heading of the step prev -> next. Empty when the XY
/// displacement is below 1e-9 m.
inline std::optional<double> compute_yaw(const Vec3& prev, const Vec3& next) {
  const double dx = next.x - prev.x, dy = next.y - prev.y;
  if (std::hypot(dx, dy) <= 1e-9) return std::nullopt;
  return std::atan2(dy, dx);
}

/// Wheel spin for a step of the given length (rolling without slip).
inline double wheel_rotation_increment(double step_displacement, double wheel_radius) {
  if (!(wheel_radius > 0.0)) throw ConfigError("wheel radius must be positive");
  return step_displacement / wheel_radius;
}

// ---------------------------------------------------------------------------
// Animation
// ---------------------------------------------------------------------------

/// Rigid-body state of the vehicle at one instant.
struct Pose {
  double t = 0.0;
  Vec3 center;              ///< world position of the mesh center (ground track + center height)
  double yaw = 0.0;         ///< heading, unwrapped
  std::vector<double> wheel_angle;  ///< cumulative spin per wheel, indexed like FacetMesh::wheels
};

/// Per-pose rotation cache used to place facets quickly.
class PoseTransform {
 public:
  PoseTransform(const FacetMesh& mesh, const Pose& pose) : mesh_(&mesh), center_(pose.center) {
    yaw_ = Mat3::rot_z(pose.yaw - mesh.native_heading);
    wheel_rot_.reserve(mesh.wheels.size());
    for (std::size_t w = 0; w < mesh.wheels.size(); ++w)
      wheel_rot_.push_back(Mat3::rot_y(w < pose.wheel_angle.size() ? pose.wheel_angle[w] : 0.0));
  }

  Vec3 position(std::size_t b) const { return center_ + yaw_ * body_offset(b); }

  Vec3 normal(std::size_t b) const {
    const auto& f = mesh_->facets[b];
    if (!f.part.is_wheel()) return yaw_ * f.normal;
    return yaw_ * (wheel_rot_[wheel_index(f.part.wheel_id)] * f.normal);
  }

  /// Vector from the vehicle center to facet b in the vehicle frame after wheel spin.
  Vec3 body_offset(std::size_t b) const {
    const auto& f = mesh_->facets[b];
    const Vec3& off = mesh_->offsets[b];
    if (!f.part.is_wheel()) return off;
    const std::size_t w = wheel_index(f.part.wheel_id);
    const Vec3 hub = mesh_->wheels[w].center - mesh_->center;
    return hub + wheel_rot_[w] * (off - hub);
  }

  /// Place an arbitrary body-frame point (relative to the mesh center). When
  /// `wheel` is set the point spins with that wheel.
  Vec3 place(const Vec3& offset, std::optional<std::size_t> wheel = std::nullopt) const {
    if (!wheel) return center_ + yaw_ * offset;
    const Vec3 hub = mesh_->wheels[*wheel].center - mesh_->center;
    return center_ + yaw_ * (hub + wheel_rot_[*wheel] * (offset - hub));
  }

  const Vec3& center() const { return center_; }

 private:
  std::size_t wheel_index(int wheel_id) const {
    for (std::size_t w = 0; w < mesh_->wheels.size(); ++w)
      if (mesh_->wheels[w].wheel_id == wheel_id) return w;
    throw ValidationError("unknown wheel id " + std::to_string(wheel_id));
  }

  const FacetMesh* mesh_;
  Vec3 center_;
  Mat3 yaw_;
  std::vector<Mat3> wheel_rot_;
};

/// Facet positions and normals of one frame.
struct Frame {
  std::vector<Vec3> centroids;
  std::vector<Vec3> normals;
};

/// Animated vehicle: per-frame rigid-body poses for a mesh. Facet positions are
/// produced from the poses on demand; `frame(f)` materialises one frame.
class FrameSet {
 public:
  FrameSet(std::shared_ptr<const FacetMesh> mesh, std::vector<Pose> poses, double frame_dt,
           std::vector<bool> stationary)
      : mesh_(std::move(mesh)),
        poses_(std::move(poses)),
        frame_dt_(frame_dt),
        stationary_(std::move(stationary)) {}

  const FacetMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const FacetMesh> mesh_ptr() const { return mesh_; }
  std::size_t frame_count() const { return poses_.size(); }
  double frame_dt() const { return frame_dt_; }
  double duration() const { return frame_dt_ * static_cast<double>(poses_.size() - 1); }
  const Pose& pose(std::size_t f) const { return poses_.at(f); }
  const std::vector<Pose>& poses() const { return poses_; }
  bool stationary(std::size_t f) const { return stationary_.at(f); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  double yaw(std::size_t f) const { return poses_.at(f).yaw; }

  Vec3 centroid(std::size_t f, std::size_t b) const { return PoseTransform(*mesh_, poses_.at(f)).position(b); }
  Vec3 normal(std::size_t f, std::size_t b) const { return PoseTransform(*mesh_, poses_.at(f)).normal(b); }

  Frame frame(std::size_t f) const {
    const PoseTransform tr(*mesh_, poses_.at(f));
    Frame out;
    out.centroids.reserve(mesh_->size());
    out.normals.reserve(mesh_->size());
    for (std::size_t b = 0; b < mesh_->size(); ++b) {
      out.centroids.push_back(tr.position(b));
      out.normals.push_back(tr.normal(b));
    }
    return out;
  }

  /// Pose at an arbitrary time by linear interpolation of the frame poses
  /// (center, unwrapped yaw and wheel angles). Times outside the animation are
  /// extrapolated from the nearest frame interval.
  Pose pose_at(double t) const {
    const double x = t / frame_dt_;
    const auto last = static_cast<long>(poses_.size()) - 1;
    long i = static_cast<long>(std::floor(x));
    i = std::clamp(i, 0L, std::max(0L, last - 1));
    const double w = x - static_cast<double>(i);
    const Pose& a = poses_[static_cast<std::size_t>(i)];
    const Pose& b = poses_[static_cast<std::size_t>(std::min(i + 1, last))];
    Pose p;
    p.t = t;
    p.center = a.center + (b.center - a.center) * w;
    p.yaw = a.yaw + (b.yaw - a.yaw) * w;
    p.wheel_angle.resize(a.wheel_angle.size());
    for (std::size_t k = 0; k < a.wheel_angle.size(); ++k)
      p.wheel_angle[k] = a.wheel_angle[k] + (b.wheel_angle[k] - a.wheel_angle[k]) * w;
    return p;
  }

 private:
  std::shared_ptr<const FacetMesh> mesh_;
  std::vector<Pose> poses_;
  double frame_dt_;
  std::vector<bool> stationary_;
  std::vector<std::string> warnings_;
};

inline constexpr double kLongVehicleWarningM = 30.0;

/// Drive the mesh along the plan: yaw from successive waypoints, wheel spin from
/// the distance covered, body offsets rotated by the cumulative yaw and then
/// translated to the waypoint.
inline FrameSet animate(std::shared_ptr<const FacetMesh> mesh, const TrajectoryPlan& plan) {
  if (!mesh || mesh->facets.empty()) throw ValidationError("animate needs a non-empty mesh");
  const auto& wp = plan.waypoints;
  const std::size_t frames = wp.size();
  if (frames < 2) throw ValidationError("trajectory needs at least two waypoints");

  // Raw yaw per frame; frame 0 borrows the first defined heading.
  std::vector<std::optional<double>> raw(frames);
  for (std::size_t f = 1; f < frames; ++f) raw[f] = compute_yaw(wp[f - 1], wp[f]);
  std::optional<double> first;
  for (std::size_t f = 1; f < frames && !first; ++f) first = raw[f];
  const double initial = first.value_or(mesh->native_heading);

  std::vector<Pose> poses(frames);
  std::vector<bool> stationary(frames, false);
  const Vec3 lift{0.0, 0.0, mesh->center.z};
  double yaw = initial;
  std::vector<double> alpha(mesh->wheels.size(), 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    if (f > 0) {
      if (raw[f]) {
        yaw += wrap_angle(*raw[f] - yaw);
      } else {
        stationary[f] = true;
      }
      const double step = (wp[f] - wp[f - 1]).norm();
      for (std::size_t w = 0; w < alpha.size(); ++w)
        alpha[w] += wheel_rotation_increment(step, mesh->wheels[w].radius);
    }
    poses[f].t = plan.frame_dt * static_cast<double>(f);
    poses[f].center = wp[f] + lift;
    poses[f].yaw = yaw;
    poses[f].wheel_angle = alpha;
  }
  FrameSet out(std::move(mesh), std::move(poses), plan.frame_dt, std::move(stationary));
  const auto [lo, hi] = out.mesh().bounds();
  if (std::max(hi.x - lo.x, hi.y - lo.y) > kLongVehicleWarningM)
    out.add_warning("vehicle is longer than 30 m; check mesh units");
  return out;
}

inline FrameSet animate(const FacetMesh& mesh, const TrajectoryPlan& plan) {
  return animate(std::make_shared<const FacetMesh>(mesh), plan);
}

}  // namespace isarforge
