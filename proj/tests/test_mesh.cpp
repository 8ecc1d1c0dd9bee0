#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "isarforge/mesh.hpp"
#include "isarforge/vehicles.hpp"

using namespace isarforge;
namespace fs = std::filesystem;

namespace {

FacetMesh parse(const std::string& text, const PartMap& pm = {}) {
  std::istringstream in(text);
  return build_mesh(parse_triangles(in), pm);
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("isarforge_mesh_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Mesh, RightTriangle) {
  const auto m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  ASSERT_EQ(m.size(), 1u);
  const auto& f = m.facets[0];
  EXPECT_NEAR(f.area, 0.5, 1e-15);
  EXPECT_NEAR(f.longest_edge, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(f.normal.z), 1.0, 1e-15);
  EXPECT_NEAR(f.centroid.x, 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(validate_mesh(m).ok());
}

TEST(Mesh, ParseErrorsCarryLineNumbers) {
  try {
    parse("v 0 0 0\nv 1 0 0\nv 0 1\nf 1 2 3\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\n\nf 1 2 3 4\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
  EXPECT_THROW(parse("v 0 0 0\nf 1 2 3\n"), ParseError);
  EXPECT_THROW(parse("bogus 1\n"), ParseError);
}

TEST(Mesh, NegativeIndicesAndSlashes) {
  const auto m = parse("v 0 0 0\nv 2 0 0\nv 0 2 0\nf -3/1/1 -2/2/2 -1/3/3\n");
  EXPECT_NEAR(m.facets[0].area, 2.0, 1e-15);
}

TEST(Mesh, DegenerateTriangleRejectedWithIndex) {
  const std::string text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n";
  try {
    parse(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("facet index 1"), std::string::npos) << e.what();
  }
}

TEST(Mesh, WheelGroupWithoutSpecRejected) {
  EXPECT_THROW(parse("g wheel_fl\nv 0 0 0\nv 1 0 0\nv 0 0 1\nf 1 2 3\n"), ValidationError);
}

TEST(Mesh, WheelGroupAndCylinderMatching) {
  PartMap pm;
  pm.wheels.push_back({0, {0, 0, 0.3}, 0.3, "wheel_a", std::nullopt});
  pm.wheels.push_back({1, {2, 0, 0.3}, 0.3, "", 0.2});
  const auto m = parse(
      "g body\nv 0 0 1\nv 1 0 1\nv 0 1 1\nf 1 2 3\n"
      "g wheel_a\nv 0 0 0.1\nv 0.1 0 0.1\nv 0 0 0.2\nf 4 5 6\n"
      "g rim\nv 2 0 0.2\nv 2.1 0 0.2\nv 2 0 0.3\nf 7 8 9\n",
      pm);
  EXPECT_FALSE(m.facets[0].part.is_wheel());
  EXPECT_EQ(m.facets[1].part.wheel_id, 0);
  EXPECT_EQ(m.facets[2].part.wheel_id, 1);
  EXPECT_TRUE(validate_mesh(m).ok());
}

TEST(Mesh, ValidateReportsConstructedViolations) {
  auto m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nv 0 0 1\nv 1 0 1\nv 0 1 1\nf 4 5 6\n");
  m.facets[1].area = 0.0;
  auto rep = validate_mesh(m);
  ASSERT_EQ(rep.findings.size(), 1u);
  EXPECT_EQ(rep.findings[0].kind, MeshFinding::Kind::kArea);
  EXPECT_EQ(rep.findings[0].index, 1);

  m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  m.facets[0].part = Part::wheel(7);
  rep = validate_mesh(m);
  ASSERT_EQ(rep.findings.size(), 1u);
  EXPECT_EQ(rep.findings[0].kind, MeshFinding::Kind::kWheelSpec);
  EXPECT_EQ(rep.findings[0].index, 7);
  EXPECT_NE(rep.findings[0].message.find("wheel_id 7"), std::string::npos);
}

TEST(Mesh, CenterDefaultsToCentroidOfCentroids) {
  const auto m = parse("v 0 0 0\nv 3 0 0\nv 0 3 0\nf 1 2 3\nv 0 0 3\nv 3 0 3\nv 0 3 3\nf 4 5 6\n");
  EXPECT_NEAR(m.center.x, 1.0, 1e-15);
  EXPECT_NEAR(m.center.z, 1.5, 1e-15);
  for (std::size_t b = 0; b < m.size(); ++b) EXPECT_LE(distance(m.center + m.offsets[b], m.facets[b].centroid), 1e-9);
}

TEST(Mesh, FleetFacetCounts) {
  const std::pair<const char*, std::size_t> expect[] = {
      {"bicycle", 3919}, {"auto_rickshaw", 6949}, {"midsize_car", 6905}, {"fullsize_car", 19964}, {"truck", 7206}};
  for (const auto& [name, n] : expect) {
    const auto m = make_vehicle(name).mesh();
    EXPECT_EQ(m.size(), n) << name;
    EXPECT_EQ(m.name, name);
    const auto rep = validate_mesh(m);
    EXPECT_TRUE(rep.ok()) << name << ": " << (rep.ok() ? "" : rep.findings[0].message);
  }
}

TEST(Mesh, FleetDimensions) {
  auto extent = [](const FacetMesh& m) {
    const auto [lo, hi] = m.bounds();
    return hi - lo;
  };
  const auto truck = extent(make_vehicle("truck").mesh());
  EXPECT_NEAR(truck.x, 8.5, 1e-6);
  EXPECT_NEAR(truck.y, 2.6, 1e-6);
  const auto car = extent(make_vehicle("midsize_car").mesh());
  EXPECT_NEAR(car.x, 4.4, 1e-6);
  EXPECT_NEAR(car.y, 1.7, 1e-6);
}

TEST(Mesh, ObjRoundTripWithSidecar) {
  const auto dir = temp_dir("roundtrip");
  const auto model = make_vehicle("bicycle");
  const auto mesh = model.mesh();
  {
    std::ofstream obj(dir / "bicycle.obj");
    write_obj(obj, mesh);
    std::ofstream side(dir / "bicycle.json");
    side << part_map_to_json(model.parts).dump();
  }
  const auto back = load_mesh(dir / "bicycle.obj");
  ASSERT_EQ(back.size(), 3919u);
  EXPECT_EQ(back.name, "bicycle");
  EXPECT_EQ(back.wheels.size(), mesh.wheels.size());
  EXPECT_LE(distance(back.center, mesh.center), 1e-12);
  std::size_t wheel_facets = 0;
  for (std::size_t b = 0; b < back.size(); ++b) {
    EXPECT_EQ(back.facets[b].part, mesh.facets[b].part);
    EXPECT_NEAR(back.facets[b].area, mesh.facets[b].area, 1e-9 * std::max(1.0, mesh.facets[b].area) + 1e-12);
    wheel_facets += back.facets[b].part.is_wheel();
  }
  EXPECT_GT(wheel_facets, 0u);
  EXPECT_TRUE(validate_mesh(back).ok());
  fs::remove_all(dir);
}

TEST(Mesh, TotalAreaInvariantUnderRotation) {
  const auto mesh = make_vehicle("midsize_car").mesh();
  const Mat3 r = Mat3::rot_z(0.7) * Mat3::rot_y(-0.3) * Mat3::rot_x(1.1);
  std::vector<Triangle> tris;
  for (const auto& f : mesh.facets)
    tris.push_back({r * f.vertices[0], r * f.vertices[1], r * f.vertices[2], "body"});
  std::stringstream obj;
  write_obj(obj, build_mesh(tris, {}));
  const auto back = build_mesh(parse_triangles(obj), {});
  EXPECT_NEAR(back.total_area() / mesh.total_area(), 1.0, 1e-6);
  EXPECT_GT(mesh.total_area(), 0.0);
}
