#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rsdf/geometry.hpp"
#include "rsdf/rng.hpp"

namespace rsdf {

struct FieldConfig {
  int l_pos = 6;        // positional-encoding frequency count for x
  int l_dir = 4;        // frequency count for the view direction
  int trunk_width = 128;
  int trunk_depth = 6;  // hidden layers in the SDF trunk
  int color_width = 64;
  int color_depth = 3;  // hidden layers in the color head
  bool geometric_init = true;
  double init_radius = 0.5;      // sphere radius of the geometric initialization
  double softplus_beta = 100.0;  // sharpness of the smooth activation
  double kappa_init = 20.0;      // logistic transition spans ~1/10 of the cube
  double scene_scale = 1.0;      // meters per normalized unit

  void validate() const;  // throws on invalid sizes
};

struct FieldSample {
  double sdf = 0.0;
  Vec3 color = Vec3::Zero();
};

// Frequency encoding: [x, sin(2^k pi x), cos(2^k pi x)] for k = 0..L-1,
// applied per coordinate. Output length is 3 + 6L.
Eigen::VectorXd encode_position(const Vec3& x, int l);

/// Common interface of the learned field and the closed-form test fields.
class SdfColorField {
 public:
  virtual ~SdfColorField() = default;
  virtual FieldSample query(const Vec3& x, const Vec3& d) const = 0;
  virtual Vec3 sdf_gradient(const Vec3& x) const = 0;
  virtual double sdf(const Vec3& x) const { return query(x, Vec3::UnitZ()).sdf; }
};

/// MLP field: SDF trunk with one skip connection plus a color head fed by the
/// trunk feature vector and the encoded view direction. All trainable
/// coefficients live in one flat parameter vector whose final entry is
/// log(kappa), the sharpness of the SDF-to-opacity logistic.
class MlpField : public SdfColorField {
 public:
  explicit MlpField(const FieldConfig& config, Rng* init_rng = nullptr);

  const FieldConfig& config() const { return config_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  int param_count() const { return static_cast<int>(params_.size()); }
  int kappa_index() const { return param_count() - 1; }
  double kappa() const { return std::exp(params_[kappa_index()]); }

  void initialize(Rng& rng);

  FieldSample query(const Vec3& x, const Vec3& d) const override;
  Vec3 sdf_gradient(const Vec3& x) const override;
  double sdf(const Vec3& x) const override;

  struct BatchResult {
    Eigen::VectorXd sdf;
    Eigen::Matrix3Xd color;  // empty unless colors were requested
    Eigen::Matrix3Xd grad;   // empty unless gradients were requested
  };

  /// Saved activations from a forward pass, consumed by backward().
  struct Cache {
    bool want_grad = false;
    bool want_color = false;
    int batch = 0;
    Eigen::MatrixXd enc;
    std::array<Eigen::MatrixXd, 3> enc_tan;
    std::vector<Eigen::MatrixXd> trunk_a;  // inputs per layer, depth+1 entries
    std::vector<std::array<Eigen::MatrixXd, 3>> trunk_a_tan;
    std::vector<Eigen::MatrixXd> trunk_z;  // pre-activations, depth entries
    std::vector<std::array<Eigen::MatrixXd, 3>> trunk_z_tan;
    std::vector<Eigen::MatrixXd> color_a;  // inputs per color layer
    std::vector<Eigen::MatrixXd> color_z;
    Eigen::MatrixXd color_out;  // pre-sigmoid
    Eigen::Matrix3Xd color_val;
  };

  // Batched evaluation at columns of X (positions) and D (unit directions).
  // D may be empty when want_color is false. Throws on non-finite input.
  BatchResult forward(const Eigen::Matrix3Xd& x, const Eigen::Matrix3Xd& d, bool want_color,
                      bool want_grad, Cache* cache = nullptr) const;

  // Accumulates d(loss)/d(params) into param_grad given the adjoints of the
  // quantities produced by forward(). Adjoints for outputs that were not
  // requested must be empty. The log(kappa) slot is left untouched; opacity
  // code owns it.
  void backward(const Cache& cache, const Eigen::VectorXd& sdf_adj,
                const Eigen::Matrix3Xd& color_adj, const Eigen::Matrix3Xd& grad_adj,
                Eigen::VectorXd& param_grad) const;

  Eigen::VectorXd sdf_batch(const Eigen::Matrix3Xd& x) const;

 private:
  struct LayerShape {
    int w_offset, b_offset, rows, cols;
  };

  Eigen::Map<const Eigen::MatrixXd> weight(const LayerShape& s) const {
    return {params_.data() + s.w_offset, s.rows, s.cols};
  }
  Eigen::Map<const Eigen::VectorXd> bias(const LayerShape& s) const {
    return {params_.data() + s.b_offset, s.rows};
  }

  void build_layout();

  FieldConfig config_;
  Eigen::VectorXd params_;
  std::vector<LayerShape> trunk_;  // hidden layers then output layer
  std::vector<LayerShape> color_;  // hidden layers then output layer
  int skip_layer_ = -1;
  int enc_pos_dim_ = 0;
  int enc_dir_dim_ = 0;
  int feature_dim_ = 0;
};

}  // namespace rsdf
