#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "rsdf/geometry.hpp"
#include "rsdf/png_io.hpp"
#include "rsdf/rng.hpp"

namespace rsdf {

struct BoxSpec {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;  // footprint rectangle, meters
  double height = 1.0;
  // face order: -x, +x, -y, +y, bottom, top
  std::array<std::array<double, 3>, 6> face_colors;

  static BoxSpec make(double x0, double y0, double x1, double y1, double height,
                      const std::array<double, 3>& base_color);
};

struct SceneSpec {
  double ground_extent = 100.0;  // plane spans [-e/2, e/2]^2 at z = 0
  std::vector<BoxSpec> boxes;
  std::array<double, 3> ground_color = {0.35, 0.35, 0.35};
  std::uint64_t seed = 0;

  // 4 boxes (8-30 m tall) on a 100x100 m plane
  static SceneSpec default_desk(std::uint64_t seed = 0);
};

struct TrajectorySpec {
  Vec3 arc_center = Vec3::Zero();  // z component ignored; altitude is separate
  double radius = 120.0;           // meters
  double altitude = 120.0;
  double azimuth_center_deg = 0.0;
  double angular_span_deg = 40.0;
  int view_count = 5;
  Vec3 look_at = Vec3::Zero();
};

struct CameraTemplate {
  int width = 160;
  int height = 160;
  double fov_deg = 45.0;  // horizontal field of view
};

struct RadarSimSpec {
  double density = 4.0;            // base surface density, points/m^2
  double emphasis = 4.0;           // facade/edge oversampling factor, >= 1
  double facade_threshold = 0.1;   // |normal.z| below this marks a facade
  double edge_band = 0.2;          // meters around crease edges
  double noise_sigma = 0.0;        // position noise, meters
  bool sensor_visibility = true;   // drop points hidden from every viewpoint
  std::uint64_t seed = 0;
};

struct DatasetBundle {
  std::vector<Image> images;
  std::vector<CameraModel> cameras;
  PointCloud cloud;
  TriangleMesh gt_mesh;
  std::map<std::string, std::string> meta;
};

// Watertight ground quad plus axis-aligned box meshes with per-face colors.
// Throws on overlapping footprints or footprints outside the ground plane.
TriangleMesh build_scene(const SceneSpec& spec);

// Cameras evenly spaced on the arc (endpoints inclusive), aimed at look_at.
std::vector<CameraModel> make_cameras(const TrajectorySpec& trajectory,
                                      const CameraTemplate& tmpl);

// CPU ray-cast rendering: one primary ray per pixel center, flat shading
// face_color * (0.3 + 0.7 max(0, n.l)) under a fixed sun, black background.
std::vector<Image> render_views(const TriangleMesh& mesh,
                                const std::vector<CameraModel>& cameras);

// Radar-like surface sampling: area-weighted base density with facades and
// crease-edge bands oversampled by the emphasis factor, optional visibility
// culling against the trajectory viewpoints, Gaussian position noise last.
PointCloud sample_radar_points(const TriangleMesh& mesh, const std::vector<CameraModel>& cameras,
                               const RadarSimSpec& spec);

// Bundle directory layout: images/view_####.png, cameras.txt, radar.xyz,
// gt_mesh.ply, meta.txt. Roundtrip is lossless; image pixels bit-identical.
void save_bundle(const DatasetBundle& bundle, const std::string& directory);
DatasetBundle load_bundle(const std::string& directory);  // throws naming missing files

// Cloud/mesh text formats, also used stand-alone by the CLI.
void save_xyz(const PointCloud& cloud, const std::string& path);
PointCloud load_xyz(const std::string& path);
void save_ply(const TriangleMesh& mesh, const std::string& path);
TriangleMesh load_ply(const std::string& path);

}  // namespace rsdf
