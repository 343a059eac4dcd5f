#include "rsdf/analytic_field.hpp"

#include <stdexcept>

namespace rsdf {

AnalyticField AnalyticField::sphere(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("AnalyticField::sphere: radius must be > 0");
  AnalyticField f(Kind::Sphere);
  f.center_ = center;
  f.radius_ = radius;
  return f;
}

AnalyticField AnalyticField::plane(const Vec3& normal, double offset) {
  if (normal.norm() < 1e-12) throw std::invalid_argument("AnalyticField::plane: zero normal");
  AnalyticField f(Kind::Plane);
  f.normal_ = normal.normalized();
  f.offset_ = offset;
  return f;
}

AnalyticField AnalyticField::box(const Aabb& aabb) {
  if (!aabb.valid() || (aabb.extent().array() <= 0.0).any())
    throw std::invalid_argument("AnalyticField::box: degenerate box");
  AnalyticField f(Kind::Box);
  f.box_ = aabb;
  return f;
}

double AnalyticField::sdf(const Vec3& x) const {
  switch (kind_) {
    case Kind::Sphere:
      return (x - center_).norm() - radius_;
    case Kind::Plane:
      return normal_.dot(x) - offset_;
    case Kind::Box: {
      const Vec3 c = box_.center();
      const Vec3 h = 0.5 * box_.extent();
      const Vec3 q = (x - c).cwiseAbs() - h;
      const Vec3 outside = q.cwiseMax(0.0);
      return outside.norm() + std::min(q.maxCoeff(), 0.0);
    }
  }
  return 0.0;
}

Vec3 AnalyticField::sdf_gradient(const Vec3& x) const {
  switch (kind_) {
    case Kind::Sphere: {
      const Vec3 r = x - center_;
      const double n = r.norm();
      return n < 1e-12 ? Vec3::UnitX() : Vec3(r / n);
    }
    case Kind::Plane:
      return normal_;
    case Kind::Box: {
      const Vec3 c = box_.center();
      const Vec3 h = 0.5 * box_.extent();
      const Vec3 p = x - c;
      const Vec3 q = p.cwiseAbs() - h;
      if ((q.array() > 0.0).any()) {
        Vec3 outside = q.cwiseMax(0.0);
        const double n = outside.norm();
        Vec3 g = Vec3::Zero();
        for (int k = 0; k < 3; ++k)
          if (q[k] > 0.0) g[k] = (p[k] >= 0.0 ? 1.0 : -1.0) * q[k] / n;
        return g;
      }
      int axis = 0;
      q.maxCoeff(&axis);
      Vec3 g = Vec3::Zero();
      g[axis] = p[axis] >= 0.0 ? 1.0 : -1.0;
      return g;
    }
  }
  return Vec3::UnitX();
}

FieldSample AnalyticField::query(const Vec3& x, const Vec3&) const {
  return FieldSample{sdf(x), Vec3(0.5, 0.5, 0.5)};
}

}  // namespace rsdf
