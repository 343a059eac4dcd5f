#pragma once

#include "rsdf/field.hpp"

namespace rsdf {

/// Closed-form SDF backends used as oracles in tests and renderer checks.
/// Color is a constant mid-gray.
class AnalyticField : public SdfColorField {
 public:
  static AnalyticField sphere(const Vec3& center, double radius);
  static AnalyticField plane(const Vec3& normal, double offset);  // s = n.x - offset
  static AnalyticField box(const Aabb& aabb);

  FieldSample query(const Vec3& x, const Vec3& d) const override;
  Vec3 sdf_gradient(const Vec3& x) const override;
  double sdf(const Vec3& x) const override;

 private:
  enum class Kind { Sphere, Plane, Box };
  AnalyticField(Kind k) : kind_(k) {}

  Kind kind_;
  Vec3 center_ = Vec3::Zero();
  double radius_ = 0.0;
  Vec3 normal_ = Vec3::UnitZ();
  double offset_ = 0.0;
  Aabb box_;
};

}  // namespace rsdf
