#pragma once

#include <vector>

#include "rsdf/field.hpp"
#include "rsdf/geometry.hpp"
#include "rsdf/rng.hpp"

namespace rsdf {

struct RaySamples {
  std::vector<double> t;      // strictly ascending
  std::vector<double> delta;  // t[i+1] - t[i], size t.size() - 1
};

struct RenderOutput {
  Vec3 color = Vec3::Zero();
  Eigen::VectorXd weights;        // w_i = T_i * alpha_i, all >= 0
  Eigen::VectorXd transmittance;  // T_1 = 1, non-increasing
  double depth = 0.0;             // sum w_i t_i
  double opacity = 0.0;           // sum w_i
};

struct RenderConfig {
  int n_samples = 64;
  bool jitter = true;
  double kappa = 20.0;  // SDF-to-opacity sharpness used for generic fields
};

// One jittered sample per uniform bin of [t_near, t_far]; bin midpoints with
// jitter disabled. Throws on inverted bounds or n < 2.
RaySamples sample_stratified(double t_near, double t_far, int n, Rng& rng, bool jitter = true);

// NeuS-style opacity from two consecutive SDF samples:
// alpha = max((phi(s_i) - phi(s_next)) / phi(s_i), 0), phi logistic with
// sharpness kappa, phi(s_i) clamped below at 1e-7 before the division.
// Throws if kappa <= 0.
double sdf_to_opacity(double s_i, double s_next, double kappa);

struct OpacityGrad {
  double d_s = 0.0;       // d alpha / d s_i
  double d_s_next = 0.0;  // d alpha / d s_next
  double d_kappa = 0.0;
};
double sdf_to_opacity_grad(double s_i, double s_next, double kappa, OpacityGrad& grad);

// Product-form compositing over per-segment opacities. No background term.
// Throws when any alpha falls outside [0, 1].
RenderOutput composite(const std::vector<double>& alphas, const std::vector<Vec3>& colors);

// Adjoints of the alphas and colors given d(loss)/d(composited color).
void composite_backward(const std::vector<double>& alphas, const std::vector<Vec3>& colors,
                        const RenderOutput& out, const Vec3& color_adj,
                        std::vector<double>& alpha_adj, std::vector<Vec3>& color_adj_out);

// Full forward render of one ray through any field. Samples the interval,
// queries the field at o + t d, converts consecutive SDF pairs to opacities
// and composites. Weight i corresponds to the segment starting at sample i.
RenderOutput render_ray(const SdfColorField& field, const Ray& ray,
                        std::pair<double, double> bounds, const RenderConfig& config, Rng& rng);

}  // namespace rsdf
