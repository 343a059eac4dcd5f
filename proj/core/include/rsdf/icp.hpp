#pragma once

#include "rsdf/geometry.hpp"

namespace rsdf {

struct IcpResult {
  Mat3 rotation = Mat3::Identity();  // target_from_source
  Vec3 translation = Vec3::Zero();
  double rmse = 0.0;
  int iterations = 0;
  std::vector<double> rmse_history;
};

// Point-to-point ICP: nearest-neighbor correspondences against the target,
// closed-form rigid fit from the cross-covariance SVD, iterated until the
// RMSE change drops below tol or max_iter is reached. Throws on empty clouds
// or degenerate (collinear) source geometry.
IcpResult icp_register(const PointCloud& source, const PointCloud& target, int max_iter = 50,
                       double tol = 1e-10);

}  // namespace rsdf
