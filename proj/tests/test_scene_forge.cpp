#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "rsdf/scene_forge.hpp"

using namespace rsdf;
namespace fs = std::filesystem;

namespace {

SceneSpec one_box_scene(double x0, double y0, double x1, double y1, double h) {
  SceneSpec spec;
  spec.boxes = {BoxSpec::make(x0, y0, x1, y1, h, {0.5, 0.5, 0.5})};
  return spec;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rsdf_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("zero boxes give a two-triangle ground plane") {
  SceneSpec spec;
  const TriangleMesh mesh = build_scene(spec);
  CHECK(mesh.face_count() == 2);
  CHECK(mesh.bounds().max.z() == 0.0);
}

TEST_CASE("one box adds twelve triangles") {
  const TriangleMesh mesh = build_scene(one_box_scene(-0.5, -0.5, 0.5, 0.5, 1.0));
  CHECK(mesh.face_count() == 14);
}

TEST_CASE("box mesh volume matches the signed-tetrahedron oracle") {
  const TriangleMesh mesh = build_scene(one_box_scene(0.0, 0.0, 2.0, 3.0, 4.0));
  // faces 0-1 are the ground quad; the box shell starts at face 2
  double volume = 0.0;
  for (std::size_t f = 2; f < mesh.face_count(); ++f) {
    const Vec3& a = mesh.vertices[mesh.faces[f][0]];
    const Vec3& b = mesh.vertices[mesh.faces[f][1]];
    const Vec3& c = mesh.vertices[mesh.faces[f][2]];
    volume += a.dot(b.cross(c)) / 6.0;
  }
  CHECK(std::abs(volume) == doctest::Approx(24.0).epsilon(1e-9));
}

TEST_CASE("overlapping or out-of-extent boxes are rejected") {
  SceneSpec overlap;
  overlap.boxes = {BoxSpec::make(0, 0, 2, 2, 1, {0.5, 0.5, 0.5}),
                   BoxSpec::make(1, 1, 3, 3, 1, {0.5, 0.5, 0.5})};
  CHECK_THROWS(build_scene(overlap));

  SceneSpec outside;
  outside.boxes = {BoxSpec::make(49, 49, 60, 60, 5, {0.5, 0.5, 0.5})};
  CHECK_THROWS(build_scene(outside));
}

TEST_CASE("cameras sit at evenly spaced azimuths and satisfy model invariants") {
  TrajectorySpec traj;
  traj.view_count = 5;
  traj.angular_span_deg = 40.0;
  traj.azimuth_center_deg = 0.0;
  CameraTemplate tmpl;
  const std::vector<CameraModel> cams = make_cameras(traj, tmpl);
  REQUIRE(cams.size() == 5);
  const double expected[] = {-20, -10, 0, 10, 20};
  for (int i = 0; i < 5; ++i) {
    cams[i].validate();
    const Vec3 pos = cams[i].translation;
    const double az = std::atan2(pos.y(), pos.x()) * 180.0 / M_PI;
    CHECK(az == doctest::Approx(expected[i]).epsilon(1e-9));
    CHECK(pos.z() == doctest::Approx(traj.altitude));
    CHECK(Vec2(pos.x(), pos.y()).norm() == doctest::Approx(traj.radius));

    // the look-at target must land on the principal point
    const auto uv = project_point(cams[i], traj.look_at);
    REQUIRE(uv.has_value());
    CHECK(std::abs(uv->x() - cams[i].principal_x) < 1.0);
    CHECK(std::abs(uv->y() - cams[i].principal_y) < 1.0);
  }
}

TEST_CASE("empty scene renders all-black images") {
  TrajectorySpec traj;
  traj.view_count = 1;
  CameraTemplate tmpl;
  tmpl.width = tmpl.height = 16;
  const std::vector<CameraModel> cams = make_cameras(traj, tmpl);
  const std::vector<Image> images = render_views(TriangleMesh{}, cams);
  REQUIRE(images.size() == 1);
  for (std::uint8_t px : images[0].pixels) CHECK(px == 0);
}

TEST_CASE("center pixel of a box view matches the single-ray shading oracle") {
  const TriangleMesh mesh = build_scene(one_box_scene(-5, -5, 5, 5, 10));
  TrajectorySpec traj;
  traj.view_count = 1;
  traj.look_at = Vec3(0, 0, 5);
  CameraTemplate tmpl;
  tmpl.width = tmpl.height = 33;
  const std::vector<CameraModel> cams = make_cameras(traj, tmpl);
  const std::vector<Image> images = render_views(mesh, cams);

  // cast the center ray by hand and apply the shading formula
  const Ray center_ray = generate_ray(cams[0], tmpl.width / 2.0, tmpl.height / 2.0);
  const auto hit = intersect_mesh(center_ray, mesh);
  REQUIRE(hit.has_value());
  const Vec3 n = mesh.face_normal(hit->face);
  const Vec3 sun = Vec3(-0.4, 0.25, 0.88).normalized();
  const double shade = 0.3 + 0.7 * std::max(0.0, n.dot(sun));
  const auto& fc = mesh.face_colors[hit->face];
  const int u = tmpl.width / 2, v = tmpl.height / 2;
  for (int c = 0; c < 3; ++c) {
    const int expected = static_cast<int>(std::lround(std::clamp(fc[c] * shade, 0.0, 1.0) * 255));
    CHECK(static_cast<int>(images[0].at(u, v, c)) == expected);
  }
}

TEST_CASE("noise-free radar points lie on the mesh surface") {
  const TriangleMesh mesh = build_scene(one_box_scene(-5, -5, 5, 5, 10));
  RadarSimSpec spec;
  spec.density = 0.5;
  spec.noise_sigma = 0.0;
  spec.sensor_visibility = false;
  const PointCloud cloud = sample_radar_points(mesh, {}, spec);
  REQUIRE(cloud.size() > 100);
  double max_dist = 0.0;
  for (std::size_t i = 0; i < cloud.size(); i += 7)  // spot-check subset, O(N·F) otherwise
    max_dist = std::max(max_dist, point_mesh_distance(cloud.points[i], mesh));
  CHECK(max_dist < 1e-6);
}

TEST_CASE("doubling density roughly doubles the point count") {
  const TriangleMesh mesh = build_scene(one_box_scene(-5, -5, 5, 5, 10));
  RadarSimSpec spec;
  spec.density = 1.0;
  spec.sensor_visibility = false;
  spec.seed = 5;
  const std::size_t base = sample_radar_points(mesh, {}, spec).size();
  spec.density = 2.0;
  const std::size_t doubled = sample_radar_points(mesh, {}, spec).size();
  CHECK(std::abs(static_cast<double>(doubled) / base - 2.0) < 0.1);
}

TEST_CASE("visibility culling removes the facade hidden from a one-sided arc") {
  const TriangleMesh mesh = build_scene(one_box_scene(-5, -5, 5, 5, 10));
  TrajectorySpec traj;  // arc on the +x side
  traj.view_count = 3;
  traj.radius = 60.0;
  traj.altitude = 20.0;
  traj.angular_span_deg = 30.0;
  const std::vector<CameraModel> cams = make_cameras(traj, CameraTemplate{});
  RadarSimSpec spec;
  spec.density = 2.0;
  spec.sensor_visibility = true;
  const PointCloud cloud = sample_radar_points(mesh, cams, spec);
  REQUIRE(!cloud.empty());
  int on_minus_x = 0;
  for (const Vec3& p : cloud.points)
    if (std::abs(p.x() + 5.0) < 1e-9 && p.z() > 0.05 && p.z() < 9.95) ++on_minus_x;
  CHECK(on_minus_x == 0);
}

TEST_CASE("bundle save/load roundtrip is the identity") {
  TempDir dir;
  DatasetBundle bundle;
  bundle.gt_mesh = build_scene(one_box_scene(-5, -5, 5, 5, 10));
  TrajectorySpec traj;
  traj.view_count = 2;
  CameraTemplate tmpl;
  tmpl.width = tmpl.height = 24;
  bundle.cameras = make_cameras(traj, tmpl);
  bundle.images = render_views(bundle.gt_mesh, bundle.cameras);
  RadarSimSpec rspec;
  rspec.density = 0.2;
  rspec.sensor_visibility = false;
  bundle.cloud = sample_radar_points(bundle.gt_mesh, bundle.cameras, rspec);
  bundle.meta["units"] = "meters";

  save_bundle(bundle, dir.path.string());
  const DatasetBundle back = load_bundle(dir.path.string());

  REQUIRE(back.images.size() == bundle.images.size());
  for (std::size_t i = 0; i < bundle.images.size(); ++i)
    CHECK(back.images[i].pixels == bundle.images[i].pixels);
  REQUIRE(back.cameras.size() == bundle.cameras.size());
  for (std::size_t i = 0; i < bundle.cameras.size(); ++i) {
    CHECK((back.cameras[i].rotation - bundle.cameras[i].rotation).norm() == 0.0);
    CHECK((back.cameras[i].translation - bundle.cameras[i].translation).norm() == 0.0);
    CHECK(back.cameras[i].focal_x == bundle.cameras[i].focal_x);
  }
  REQUIRE(back.cloud.size() == bundle.cloud.size());
  for (std::size_t i = 0; i < bundle.cloud.size(); ++i)
    CHECK((back.cloud.points[i] - bundle.cloud.points[i]).norm() == 0.0);
  CHECK(back.gt_mesh.vertex_count() == bundle.gt_mesh.vertex_count());
  CHECK(back.gt_mesh.face_count() == bundle.gt_mesh.face_count());
  CHECK(back.meta.at("units") == "meters");
}

TEST_CASE("loading a bundle with a missing file names it") {
  TempDir dir;
  DatasetBundle bundle;
  bundle.gt_mesh = build_scene(SceneSpec{});
  TrajectorySpec traj;
  traj.view_count = 1;
  CameraTemplate tmpl;
  tmpl.width = tmpl.height = 8;
  bundle.cameras = make_cameras(traj, tmpl);
  bundle.images = render_views(bundle.gt_mesh, bundle.cameras);
  bundle.cloud.points = {Vec3(0, 0, 0)};
  save_bundle(bundle, dir.path.string());
  fs::remove(dir.path / "cameras.txt");
  try {
    load_bundle(dir.path.string());
    FAIL("expected a throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("cameras.txt") != std::string::npos);
  }
}

TEST_CASE("large cloud survives the xyz roundtrip exactly") {
  TempDir dir;
  PointCloud cloud;
  Rng rng(44);
  for (int i = 0; i < 100000; ++i)
    cloud.points.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0, 30));
  const std::string path = (dir.path / "cloud.xyz").string();
  save_xyz(cloud, path);
  const PointCloud back = load_xyz(path);
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); i += 997)
    CHECK((back.points[i] - cloud.points[i]).norm() == 0.0);
}

TEST_CASE("ply roundtrip preserves geometry and face colors") {
  TempDir dir;
  const TriangleMesh mesh = build_scene(one_box_scene(-2, -3, 4, 5, 7));
  const std::string path = (dir.path / "mesh.ply").string();
  save_ply(mesh, path);
  const TriangleMesh back = load_ply(path);
  REQUIRE(back.vertex_count() == mesh.vertex_count());
  REQUIRE(back.face_count() == mesh.face_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
    CHECK((back.vertices[i] - mesh.vertices[i]).norm() < 1e-12);
  REQUIRE(back.face_colors.size() == mesh.face_colors.size());
  for (std::size_t f = 0; f < mesh.face_count(); ++f)
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(back.face_colors[f][c] - mesh.face_colors[f][c]) <= 1.0 / 255.0);
}

TEST_CASE("default desk scene matches its contract") {
  const SceneSpec spec = SceneSpec::default_desk(0);
  CHECK(spec.ground_extent == 100.0);
  REQUIRE(spec.boxes.size() == 4);
  for (const BoxSpec& b : spec.boxes) {
    CHECK(b.height >= 8.0);
    CHECK(b.height <= 30.0);
  }
  CHECK_NOTHROW(build_scene(spec));
}

TEST_CASE("radar sampling is deterministic per seed") {
  const TriangleMesh mesh = build_scene(one_box_scene(-5, -5, 5, 5, 10));
  RadarSimSpec spec;
  spec.density = 1.0;
  spec.sensor_visibility = false;
  spec.seed = 123;
  const PointCloud a = sample_radar_points(mesh, {}, spec);
  const PointCloud b = sample_radar_points(mesh, {}, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK((a.points[i] - b.points[i]).norm() == 0.0);
}
