#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rsdf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera. Pose is stored as world_from_camera: a world point is
/// rotation * x_cam + translation. Camera frame is x-right, y-down, z-forward.
struct CameraModel {
  int image_width = 0;
  int image_height = 0;
  double focal_x = 0.0;
  double focal_y = 0.0;
  double principal_x = 0.0;
  double principal_y = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  // Throws std::invalid_argument on a non-orthonormal rotation (tol 1e-6),
  // non-positive focal length, or a principal point outside the image.
  void validate() const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit norm, within 1e-9
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> intensity;  // empty or size() == points.size()

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void validate() const;  // rejects non-finite coordinates, negative intensity
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  static Aabb of_points(const std::vector<Vec3>& pts);
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::array<double, 3>> face_colors;  // empty or size() == faces.size()

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  Vec3 face_normal(std::size_t f) const;  // unit, CCW winding
  double face_area(std::size_t f) const;
  Aabb bounds() const;
  double area() const;

  void validate() const;  // rejects out-of-range or degenerate faces
};

// Pixel convention: the center of integer pixel (i, j) is at continuous
// coordinates (i + 0.5, j + 0.5). This is used consistently by ray
// generation, projection and mask construction.

// Back-project continuous pixel (u, v) to a world-frame unit ray through the
// camera center. Throws std::invalid_argument if the pixel is out of bounds.
Ray generate_ray(const CameraModel& camera, double u, double v);

// Project a world point; returns continuous pixel coordinates if the point is
// in front of the camera and inside the frame, std::nullopt otherwise.
std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& x);

// Slab-method ray/box intersection. Returns (t_near, t_far) with
// t_near <= t_far and t_far > 0; t_near is clamped to 0 when the origin is
// inside the box. std::nullopt when the ray misses or the box is behind.
std::optional<std::pair<double, double>> intersect_aabb(const Ray& ray, const Aabb& box);

// Moller-Trumbore. Returns the ray parameter t > eps of the nearest hit.
std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                         const Vec3& c, double eps = 1e-9);

struct MeshHit {
  double t;
  int face;
};

// Linear scan over all faces; fine for the small procedural meshes used here.
std::optional<MeshHit> intersect_mesh(const Ray& ray, const TriangleMesh& mesh,
                                      double t_min = 1e-9,
                                      double t_max = std::numeric_limits<double>::infinity());

// Unsigned distance from a point to the closest triangle of the mesh.
double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh);

}  // namespace rsdf
