#include "rsdf/icp.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "rsdf/kdtree.hpp"

namespace rsdf {

namespace {

// closed-form rigid fit: target_from_source for paired points
void fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst, Mat3& rotation,
               Vec3& translation) {
  const double n = static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (const Vec3& p : src) cs += p;
  for (const Vec3& p : dst) cd += p;
  cs /= n;
  cd /= n;
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  rotation = svd.matrixV() * d * svd.matrixU().transpose();
  translation = cd - rotation * cs;
}

}  // namespace

IcpResult icp_register(const PointCloud& source, const PointCloud& target, int max_iter,
                       double tol) {
  if (source.empty() || target.empty())
    throw std::invalid_argument("icp_register: empty point cloud");

  // collinear source geometry cannot pin down a rotation
  {
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : source.points) mean += p;
    mean /= static_cast<double>(source.size());
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : source.points) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const double top = es.eigenvalues()[2];
    if (top <= 0.0 || es.eigenvalues()[1] < 1e-12 * top)
      throw std::invalid_argument("icp_register: degenerate (collinear) source geometry");
  }

  const KdTree tree(target.points);
  IcpResult res;
  double prev_rmse = std::numeric_limits<double>::infinity();
  std::vector<Vec3> moved(source.points);
  std::vector<Vec3> matched(source.points.size());

  for (int iter = 0; iter < max_iter; ++iter) {
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      const auto nn = tree.nearest(moved[i]);
      matched[i] = target.points[nn.index];
      sq_sum += nn.distance * nn.distance;
    }
    const double rmse = std::sqrt(sq_sum / static_cast<double>(moved.size()));
    res.rmse = rmse;
    res.rmse_history.push_back(rmse);
    res.iterations = iter + 1;
    if (std::abs(prev_rmse - rmse) < tol) break;
    prev_rmse = rmse;

    Mat3 r;
    Vec3 t;
    fit_rigid(source.points, matched, r, t);
    res.rotation = r;
    res.translation = t;
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = r * source.points[i] + t;
  }
  return res;
}

}  // namespace rsdf
