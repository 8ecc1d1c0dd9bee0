#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "isarforge/kinematics.hpp"
#include "isarforge/vehicles.hpp"

using namespace isarforge;

namespace {

std::shared_ptr<const FacetMesh> car() {
  static const auto m = std::make_shared<const FacetMesh>(make_vehicle("midsize_car").mesh());
  return m;
}

// Heading of the path tangent by central differences (independent of the
// analytic arc formulas).
double numeric_heading(const JunctionPath& p, double s) {
  const double h = 1e-6;
  const Vec3 d = p.point_at(s + h) - p.point_at(s - h);
  return std::atan2(d.y, d.x);
}

double numeric_curvature(const JunctionPath& p, double s) {
  const double h = 1e-3;
  return wrap_angle(numeric_heading(p, s + h) - numeric_heading(p, s - h)) / (2 * h);
}

}  // namespace

TEST(Routes, SixteenNamedRoutes) {
  const auto routes = all_routes();
  ASSERT_EQ(routes.size(), 16u);
  std::set<std::string> names;
  for (const auto& r : routes) {
    names.insert(route_name(r));
    EXPECT_EQ(route_name(parse_route(route_name(r))), route_name(r));
  }
  const std::set<std::string> expect{"S2N", "N2S", "W2E", "E2W", "S2E", "E2N", "N2W", "W2S",
                                     "S2W", "W2N", "N2E", "E2S", "S2S", "E2E", "N2N", "W2W"};
  EXPECT_EQ(names, expect);
  EXPECT_EQ(parse_route("S2E").manoeuvre, Manoeuvre::kRight);
  EXPECT_EQ(parse_route("S2W").manoeuvre, Manoeuvre::kLeft);
  EXPECT_EQ(parse_route("E2E").manoeuvre, Manoeuvre::kUTurn);
  EXPECT_THROW(parse_route("S3N"), ConfigError);
  EXPECT_THROW(parse_route("X2N"), ConfigError);
}

TEST(Trajectory, ConstantSpeedSamplingOnGround) {
  for (const auto& r : all_routes()) {
    const auto plan = make_trajectory(r, 8.0, 5.0, 0.01);
    ASSERT_EQ(plan.frame_count(), 501u);
    for (std::size_t f = 1; f < plan.frame_count(); ++f) {
      const double step = (plan.waypoints[f] - plan.waypoints[f - 1]).norm();
      EXPECT_NEAR(step, 0.08, 0.05 * 0.08) << route_name(r) << " frame " << f;
      EXPECT_EQ(plan.waypoints[f].z, 0.0);
    }
  }
}

TEST(Trajectory, ManoeuvreCentredInDuration) {
  const auto plan = make_trajectory(parse_route("S2E"), 8.0, 5.0, 0.01);
  const double s_mid = plan.start_s + 8.0 * 2.5;
  EXPECT_NEAR(s_mid, 0.5 * plan.path.arc_length, 1e-9);
}

TEST(Trajectory, ApproachDistanceNeedsEnoughDuration) {
  TrajectoryOptions o;
  o.approach_m = 40.0;
  try {
    make_trajectory(parse_route("S2N"), 8.0, 2.0, 0.01, o);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("minimum duration is 5"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(make_trajectory(parse_route("S2N"), 8.0, 6.0, 0.01, o));
}

TEST(Trajectory, ExitRoadsMatchRouteNames) {
  const Vec3 c = JunctionGeometry{}.center;
  auto exit_dir = [&](const std::string& name) {
    const auto plan = make_trajectory(parse_route(name), 8.0, 6.0, 0.01);
    return plan.waypoints.back() - c;
  };
  EXPECT_GT(exit_dir("S2N").y, 10.0);
  EXPECT_GT(exit_dir("S2E").x, 10.0);
  EXPECT_LT(exit_dir("S2W").x, -10.0);
  EXPECT_LT(exit_dir("S2S").y, -10.0);
  EXPECT_LT(exit_dir("N2S").y, -10.0);
  EXPECT_GT(exit_dir("E2N").y, 10.0);
  EXPECT_LT(exit_dir("W2S").y, -10.0);
}

TEST(Yaw, FourQuadrant) {
  EXPECT_NEAR(*compute_yaw({0, 0, 0}, {-1, 0, 0}), kPi, 1e-15);
  EXPECT_NEAR(*compute_yaw({0, 0, 0}, {0, -1, 0}), -kPi / 2, 1e-15);
  EXPECT_NEAR(*compute_yaw({0, 0, 0}, {-1, -1, 0}), -3 * kPi / 4, 1e-15);
  EXPECT_FALSE(compute_yaw({1, 1, 0}, {1, 1 + 1e-10, 0}).has_value());
}

TEST(Yaw, MatchesNumericalTangent) {
  for (const auto& r : all_routes()) {
    const auto plan = make_trajectory(r, 8.0, 5.0, 0.01);
    const auto frames = animate(car(), plan);
    const double step = 8.0 * 0.01;
    for (std::size_t f = 1; f < frames.frame_count(); ++f) {
      // The chord from f-1 to f is parallel to the tangent at its midpoint on
      // both lines and circular arcs; chords across a line/arc joint are skipped.
      const double s_mid = plan.start_s + step * (static_cast<double>(f) - 0.5);
      const double s0 = s_mid - 0.5 * step + 2e-3, s1 = s_mid + 0.5 * step - 2e-3;
      if (std::abs(numeric_curvature(plan.path, s0) - numeric_curvature(plan.path, s1)) > 1e-3) continue;
      const double expect = numeric_heading(plan.path, s_mid);
      EXPECT_NEAR(wrap_angle(frames.yaw(f) - expect), 0.0, 1e-6) << route_name(r) << " frame " << f;
    }
    for (std::size_t f = 1; f < frames.frame_count(); ++f)
      EXPECT_LT(std::abs(frames.yaw(f) - frames.yaw(f - 1)), kPi);
  }
}

TEST(Yaw, TurnDirectionAndTotal) {
  auto total = [](const std::string& name) {
    const auto frames = animate(car(), make_trajectory(parse_route(name), 8.0, 6.0, 0.01));
    double mono = 0.0;
    for (std::size_t f = 1; f < frames.frame_count(); ++f) {
      const double d = frames.yaw(f) - frames.yaw(f - 1);
      if (std::abs(d) > 1e-12) {
        if (mono == 0.0) mono = d;
        EXPECT_GT(d * mono, 0.0) << name << ": turn direction flips at frame " << f;
      }
    }
    return frames.yaw(frames.frame_count() - 1) - frames.yaw(0);
  };
  EXPECT_NEAR(total("S2E"), -kPi / 2, 1e-9);
  EXPECT_NEAR(total("W2N"), kPi / 2, 1e-9);
  EXPECT_NEAR(total("N2N"), -kPi, 1e-9);
  EXPECT_NEAR(total("E2W"), 0.0, 1e-9);
}

TEST(Animate, StationaryFramesHoldYaw) {
  TrajectoryPlan plan = make_trajectory(parse_route("S2E"), 8.0, 0.5, 0.01);
  plan.waypoints[20] = plan.waypoints[19];
  const auto frames = animate(car(), plan);
  EXPECT_TRUE(frames.stationary(20));
  EXPECT_DOUBLE_EQ(frames.yaw(20), frames.yaw(19));
}

TEST(Animate, RigidBodyDistancesPreserved) {
  const auto frames = animate(car(), make_trajectory(parse_route("S2W"), 8.0, 5.0, 0.01));
  const auto& mesh = frames.mesh();
  std::vector<std::size_t> chassis;
  for (std::size_t b = 0; b < mesh.size() && chassis.size() < 40; b += 97)
    if (!mesh.facets[b].part.is_wheel()) chassis.push_back(b);
  for (std::size_t f : {0u, 137u, 250u, 500u}) {
    for (std::size_t i = 0; i + 1 < chassis.size(); ++i) {
      const double d0 = distance(mesh.facets[chassis[i]].centroid, mesh.facets[chassis[i + 1]].centroid);
      const double df = distance(frames.centroid(f, chassis[i]), frames.centroid(f, chassis[i + 1]));
      EXPECT_NEAR(df, d0, 1e-9);
    }
    for (std::size_t b : chassis) EXPECT_NEAR(frames.normal(f, b).norm(), 1.0, 1e-12);
  }
}

TEST(Animate, CenterFollowsWaypoints) {
  const auto plan = make_trajectory(parse_route("N2E"), 8.0, 5.0, 0.01);
  const auto frames = animate(car(), plan);
  for (std::size_t f = 0; f < plan.frame_count(); f += 50) {
    const Vec3 c = frames.pose(f).center;
    EXPECT_NEAR(c.x, plan.waypoints[f].x, 1e-12);
    EXPECT_NEAR(c.y, plan.waypoints[f].y, 1e-12);
    EXPECT_NEAR(c.z, frames.mesh().center.z, 1e-12);
  }
}

TEST(Animate, WheelSpinFromDistance) {
  const auto frames = animate(car(), make_trajectory(parse_route("S2N"), 8.0, 1.0, 0.01));
  const double r = frames.mesh().wheels[0].radius;
  const auto& last = frames.pose(frames.frame_count() - 1);
  EXPECT_NEAR(last.wheel_angle[0], 8.0 * 1.0 / r, 1e-9);
  EXPECT_THROW(wheel_rotation_increment(1.0, 0.0), ConfigError);
}

// Rolling contact: the top of the wheel moves at twice the hub speed and the
// contact point is momentarily at rest. Velocities by finite differences of
// the placed material points.
TEST(Animate, RollingContactFiniteDifference) {
  const auto frames = animate(car(), make_trajectory(parse_route("W2E"), 5.0, 2.0, 0.01));
  const auto& mesh = frames.mesh();
  const std::size_t w = 0;
  const Vec3 hub = mesh.wheels[w].center - mesh.center;
  const double r = mesh.wheels[w].radius;
  const double t = 0.734, dt = 1e-5;
  const Pose p0 = frames.pose_at(t), p1 = frames.pose_at(t + dt);
  const Mat3 undo = Mat3::rot_y(-p0.wheel_angle[w]);
  auto velocity = [&](const Vec3& spun) {
    const Vec3 material = hub + undo * (spun - hub);
    const Vec3 a = PoseTransform(mesh, p0).place(material, w);
    const Vec3 b = PoseTransform(mesh, p1).place(material, w);
    return (b - a) / dt;
  };
  const Vec3 vc = (p1.center - p0.center) / dt;
  const Vec3 top = velocity(hub + Vec3{0, 0, r});
  const Vec3 contact = velocity(hub - Vec3{0, 0, r});
  EXPECT_NEAR(top.norm() / vc.norm(), 2.0, 1e-3);
  EXPECT_GT(dot(top, vc), 0.0);
  EXPECT_LT(contact.norm() / vc.norm(), 1e-3);
}

TEST(Animate, PoseInterpolationHitsFrames) {
  const auto frames = animate(car(), make_trajectory(parse_route("E2S"), 8.0, 1.0, 0.01));
  for (std::size_t f : {0u, 33u, 100u}) {
    const Pose p = frames.pose_at(static_cast<double>(f) * 0.01);
    EXPECT_NEAR(distance(p.center, frames.pose(f).center), 0.0, 1e-9);
    EXPECT_NEAR(p.yaw, frames.yaw(f), 1e-9);
  }
}

TEST(Animate, LongVehicleWarning) {
  std::vector<Triangle> tris{{{0, 0, 0}, {40, 0, 0}, {0, 1, 0}, "body"}};
  const auto frames = animate(build_mesh(tris, {}), make_trajectory(parse_route("S2N"), 8.0, 0.1, 0.01));
  ASSERT_EQ(frames.warnings().size(), 1u);
}
