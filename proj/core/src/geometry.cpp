#include "rsdf/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rsdf {

void CameraModel::validate() const {
  if (image_width <= 0 || image_height <= 0)
    throw std::invalid_argument("CameraModel: non-positive image size");
  if (focal_x <= 0.0 || focal_y <= 0.0)
    throw std::invalid_argument("CameraModel: focal lengths must be positive");
  if (principal_x < 0.0 || principal_x > image_width || principal_y < 0.0 ||
      principal_y > image_height)
    throw std::invalid_argument("CameraModel: principal point outside image bounds");
  const Mat3 rtr = rotation.transpose() * rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument("CameraModel: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw std::invalid_argument("CameraModel: rotation determinant is not +1");
}

void PointCloud::validate() const {
  for (const Vec3& p : points)
    if (!p.allFinite()) throw std::invalid_argument("PointCloud: non-finite coordinate");
  if (!intensity.empty()) {
    if (intensity.size() != points.size())
      throw std::invalid_argument("PointCloud: intensity size mismatch");
    for (double v : intensity)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("PointCloud: invalid intensity value");
  }
}

Aabb Aabb::of_points(const std::vector<Vec3>& pts) {
  Aabb box;
  if (pts.empty()) return box;
  box.min = box.max = pts[0];
  for (const Vec3& p : pts) box.expand(p);
  return box;
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const auto& tri = faces[f];
  const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  return e1.cross(e2).normalized();
}

double TriangleMesh::face_area(std::size_t f) const {
  const auto& tri = faces[f];
  const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * e1.cross(e2).norm();
}

Aabb TriangleMesh::bounds() const { return Aabb::of_points(vertices); }

double TriangleMesh::area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) a += face_area(f);
  return a;
}

void TriangleMesh::validate() const {
  const int v = static_cast<int>(vertices.size());
  for (const auto& f : faces) {
    for (int idx : f)
      if (idx < 0 || idx >= v) throw std::invalid_argument("TriangleMesh: face index out of range");
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw std::invalid_argument("TriangleMesh: degenerate face with repeated index");
  }
  if (!face_colors.empty() && face_colors.size() != faces.size())
    throw std::invalid_argument("TriangleMesh: face color count mismatch");
}

Ray generate_ray(const CameraModel& camera, double u, double v) {
  if (!(u >= 0.0) || u >= camera.image_width || !(v >= 0.0) || v >= camera.image_height) {
    std::ostringstream os;
    os << "generate_ray: pixel (" << u << ", " << v << ") outside image "
       << camera.image_width << "x" << camera.image_height;
    throw std::invalid_argument(os.str());
  }
  Vec3 dir_cam((u - camera.principal_x) / camera.focal_x,
               (v - camera.principal_y) / camera.focal_y, 1.0);
  Ray ray;
  ray.origin = camera.translation;
  ray.direction = (camera.rotation * dir_cam).normalized();
  return ray;
}

std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& x) {
  const Vec3 x_cam = camera.rotation.transpose() * (x - camera.translation);
  if (x_cam.z() <= 0.0) return std::nullopt;
  const double u = camera.focal_x * x_cam.x() / x_cam.z() + camera.principal_x;
  const double v = camera.focal_y * x_cam.y() / x_cam.z() + camera.principal_y;
  if (u < 0.0 || u >= camera.image_width || v < 0.0 || v >= camera.image_height)
    return std::nullopt;
  return Vec2(u, v);
}

std::optional<std::pair<double, double>> intersect_aabb(const Ray& ray, const Aabb& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double o = ray.origin[k];
    const double d = ray.direction[k];
    if (std::abs(d) < 1e-15) {
      if (o < box.min[k] || o > box.max[k]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[k] - o) / d;
    double t1 = (box.max[k] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_far <= 0.0) return std::nullopt;
  t_near = std::max(t_near, 0.0);
  return std::make_pair(t_near, t_far);
}

std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                         const Vec3& c, double eps) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = ray.direction.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= eps) return std::nullopt;
  return t;
}

std::optional<MeshHit> intersect_mesh(const Ray& ray, const TriangleMesh& mesh, double t_min,
                                      double t_max) {
  std::optional<MeshHit> best;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    auto t = intersect_triangle(ray, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                mesh.vertices[tri[2]], t_min);
    if (t && *t < t_max && (!best || *t < best->t)) best = MeshHit{*t, static_cast<int>(f)};
  }
  return best;
}

namespace {

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, closest point on triangle
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

}  // namespace

double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tri : mesh.faces) {
    best = std::min(best, point_triangle_distance(p, mesh.vertices[tri[0]],
                                                  mesh.vertices[tri[1]], mesh.vertices[tri[2]]));
  }
  return best;
}

}  // namespace rsdf
