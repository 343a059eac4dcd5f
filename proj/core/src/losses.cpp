#include "rsdf/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace rsdf {

void LossWeights::validate() const {
  if (!std::isfinite(beta_surface) || !std::isfinite(beta_eik) || beta_surface < 0.0 ||
      beta_eik < 0.0)
    throw std::invalid_argument("LossWeights: weights must be finite and non-negative");
}

double color_loss(const Eigen::Matrix3Xd& rendered, const Eigen::Matrix3Xd& truth) {
  if (rendered.cols() != truth.cols())
    throw std::invalid_argument("color_loss: batch shape mismatch");
  if (rendered.cols() == 0) throw std::invalid_argument("color_loss: empty batch");
  return (rendered - truth).cwiseAbs().mean();
}

double surface_loss(const SdfColorField& field, const std::vector<Vec3>& points) {
  if (points.empty()) throw std::invalid_argument("surface_loss: empty point batch");
  double acc = 0.0;
  for (const Vec3& p : points) acc += std::abs(field.sdf(p));
  return acc / static_cast<double>(points.size());
}

double surface_loss_values(const Eigen::VectorXd& sdf) {
  if (sdf.size() == 0) throw std::invalid_argument("surface_loss: empty point batch");
  return sdf.cwiseAbs().mean();
}

double eikonal_loss(const Eigen::Matrix3Xd& gradients) {
  if (gradients.cols() == 0) throw std::invalid_argument("eikonal_loss: empty gradient batch");
  const Eigen::ArrayXd norms = gradients.colwise().norm().transpose().array();
  return ((norms - 1.0).square()).mean();
}

LossBreakdown total_loss(double color, double surface, double eikonal, const LossWeights& w) {
  w.validate();
  if (color < 0.0 || surface < 0.0 || eikonal < 0.0)
    throw std::invalid_argument("total_loss: negative loss component");
  LossBreakdown b;
  b.color = color;
  b.surface = surface;
  b.eikonal = eikonal;
  b.total = color + w.beta_surface * surface + w.beta_eik * eikonal;
  return b;
}

}  // namespace rsdf
