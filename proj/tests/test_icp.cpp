#include <doctest.h>

#include "rsdf/icp.hpp"
#include "rsdf/rng.hpp"

using namespace rsdf;

namespace {

PointCloud box_cloud(int n, std::uint64_t seed) {
  PointCloud cloud;
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(-10, 10), rng.uniform(-6, 6), rng.uniform(0, 4));
  return cloud;
}

PointCloud transformed(const PointCloud& cloud, const Mat3& rot, const Vec3& t) {
  PointCloud out;
  for (const Vec3& p : cloud.points) out.points.push_back(rot * p + t);
  return out;
}

double rotation_angle_deg(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("identical clouds register to the identity") {
  const PointCloud cloud = box_cloud(500, 1);
  const IcpResult result = icp_register(cloud, cloud);
  CHECK((result.rotation - Mat3::Identity()).norm() < 1e-9);
  CHECK(result.translation.norm() < 1e-9);
  CHECK(result.rmse < 1e-9);
}

TEST_CASE("pure translation is recovered") {
  // keep the offset small relative to the point spacing so nearest-neighbor
  // correspondences can pull the cloud into register
  const PointCloud source = box_cloud(800, 2);
  const Vec3 t(0.4, -0.3, 0.2);
  const PointCloud target = transformed(source, Mat3::Identity(), t);
  const IcpResult result = icp_register(source, target, 100);
  CHECK((result.translation - t).norm() < 1e-6);
  // acos of a trace this close to 3 bottoms out around 1e-6 deg numerically
  CHECK(rotation_angle_deg(result.rotation) < 1e-3);
}

TEST_CASE("10 degree z-rotation is recovered on a noiseless cloud") {
  const PointCloud source = box_cloud(1000, 3);
  const Mat3 rot = Eigen::AngleAxisd(10.0 * M_PI / 180.0, Vec3::UnitZ()).toRotationMatrix();
  const PointCloud target = transformed(source, rot, Vec3::Zero());
  const IcpResult result = icp_register(source, target);
  CHECK(rotation_angle_deg(result.rotation * rot.transpose()) < 0.1);
}

TEST_CASE("rmse history is non-increasing") {
  const PointCloud source = box_cloud(600, 4);
  const Mat3 rot = Eigen::AngleAxisd(0.1, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  const PointCloud target = transformed(source, rot, Vec3(0.5, -0.2, 0.1));
  const IcpResult result = icp_register(source, target);
  for (std::size_t i = 1; i < result.rmse_history.size(); ++i)
    CHECK(result.rmse_history[i] <= result.rmse_history[i - 1] + 1e-12);
}

TEST_CASE("degenerate collinear source is rejected") {
  PointCloud line;
  for (int i = 0; i < 100; ++i) line.points.emplace_back(i * 0.1, 0.0, 0.0);
  const PointCloud target = box_cloud(100, 5);
  CHECK_THROWS(icp_register(line, target));
}

TEST_CASE("empty clouds are rejected") {
  CHECK_THROWS(icp_register(PointCloud{}, box_cloud(10, 6)));
  CHECK_THROWS(icp_register(box_cloud(10, 6), PointCloud{}));
}
