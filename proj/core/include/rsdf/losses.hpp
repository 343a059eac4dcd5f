#pragma once

#include <vector>

#include "rsdf/field.hpp"
#include "rsdf/geometry.hpp"

namespace rsdf {

struct LossWeights {
  double beta_surface = 1.0;
  double beta_eik = 0.1;

  void validate() const;  // finite, non-negative
};

struct LossBreakdown {
  double color = 0.0;
  double surface = 0.0;
  double eikonal = 0.0;
  double total = 0.0;
};

// Mean absolute difference over rays and channels.
double color_loss(const Eigen::Matrix3Xd& rendered, const Eigen::Matrix3Xd& truth);

// Mean |sdf| over a pre-normalized point batch. Throws on an empty batch.
double surface_loss(const SdfColorField& field, const std::vector<Vec3>& points);
double surface_loss_values(const Eigen::VectorXd& sdf);

// Mean squared deviation of gradient norms from 1.
double eikonal_loss(const Eigen::Matrix3Xd& gradients);

LossBreakdown total_loss(double color, double surface, double eikonal, const LossWeights& w);

}  // namespace rsdf
