#include "rsdf/field.hpp"

#include <cmath>
#include <stdexcept>

namespace rsdf {

namespace {

// softplus with sharpness beta and its first two derivatives
inline double softplus(double z, double beta) {
  const double bz = beta * z;
  if (bz > 30.0) return z;
  if (bz < -30.0) return std::exp(bz) / beta;
  return std::log1p(std::exp(bz)) / beta;
}

inline double logistic(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus_d1(double z, double beta) { return logistic(beta * z); }

inline double softplus_d2(double z, double beta) {
  const double s = logistic(beta * z);
  return beta * s * (1.0 - s);
}

Eigen::MatrixXd apply_softplus(const Eigen::MatrixXd& z, double beta) {
  return z.unaryExpr([beta](double v) { return softplus(v, beta); });
}

Eigen::MatrixXd apply_d1(const Eigen::MatrixXd& z, double beta) {
  return z.unaryExpr([beta](double v) { return softplus_d1(v, beta); });
}

Eigen::MatrixXd apply_d2(const Eigen::MatrixXd& z, double beta) {
  return z.unaryExpr([beta](double v) { return softplus_d2(v, beta); });
}

}  // namespace

void FieldConfig::validate() const {
  if (l_pos < 0 || l_dir < 0) throw std::invalid_argument("FieldConfig: negative frequency count");
  if (trunk_width < 1 || trunk_depth < 1 || color_width < 1 || color_depth < 1)
    throw std::invalid_argument("FieldConfig: width and depth must be >= 1");
  if (!(scene_scale > 0.0)) throw std::invalid_argument("FieldConfig: scene_scale must be > 0");
  if (!(kappa_init > 0.0)) throw std::invalid_argument("FieldConfig: kappa_init must be > 0");
}

Eigen::VectorXd encode_position(const Vec3& x, int l) {
  if (l < 0) throw std::invalid_argument("encode_position: negative frequency count");
  Eigen::VectorXd out(3 + 6 * l);
  out.head<3>() = x;
  double freq = M_PI;
  for (int k = 0; k < l; ++k) {
    for (int c = 0; c < 3; ++c) out[3 + 6 * k + c] = std::sin(freq * x[c]);
    for (int c = 0; c < 3; ++c) out[3 + 6 * k + 3 + c] = std::cos(freq * x[c]);
    freq *= 2.0;
  }
  return out;
}

namespace {

// Batched encoding with optional per-coordinate tangent matrices.
void encode_batch(const Eigen::Matrix3Xd& x, int l, Eigen::MatrixXd& val,
                  std::array<Eigen::MatrixXd, 3>* tan) {
  const int b = static_cast<int>(x.cols());
  const int dim = 3 + 6 * l;
  val.resize(dim, b);
  val.topRows(3) = x;
  if (tan) {
    for (int k = 0; k < 3; ++k) {
      (*tan)[k].setZero(dim, b);
      (*tan)[k].row(k).setOnes();
    }
  }
  double freq = M_PI;
  for (int k = 0; k < l; ++k) {
    for (int c = 0; c < 3; ++c) {
      val.row(3 + 6 * k + c) = (freq * x.row(c)).array().sin();
      val.row(3 + 6 * k + 3 + c) = (freq * x.row(c)).array().cos();
      if (tan) {
        (*tan)[c].row(3 + 6 * k + c) = freq * (freq * x.row(c)).array().cos();
        (*tan)[c].row(3 + 6 * k + 3 + c) = -freq * (freq * x.row(c)).array().sin();
      }
    }
    freq *= 2.0;
  }
}

}  // namespace

MlpField::MlpField(const FieldConfig& config, Rng* init_rng) : config_(config) {
  config_.validate();
  build_layout();
  if (init_rng) {
    initialize(*init_rng);
  } else {
    Rng rng(0);
    initialize(rng);
  }
}

void MlpField::build_layout() {
  enc_pos_dim_ = 3 + 6 * config_.l_pos;
  enc_dir_dim_ = 3 + 6 * config_.l_dir;
  feature_dim_ = config_.trunk_width;
  skip_layer_ = config_.trunk_depth >= 3 ? config_.trunk_depth / 2 : -1;

  int offset = 0;
  auto push = [&](std::vector<LayerShape>& dst, int rows, int cols) {
    LayerShape s{offset, offset + rows * cols, rows, cols};
    offset += rows * cols + rows;
    dst.push_back(s);
  };

  trunk_.clear();
  color_.clear();
  const int w = config_.trunk_width;
  for (int l = 0; l < config_.trunk_depth; ++l) {
    int in = (l == 0) ? enc_pos_dim_ : w;
    if (l == skip_layer_ && l != 0) in += enc_pos_dim_;
    push(trunk_, w, in);
  }
  push(trunk_, 1 + feature_dim_, w);  // sdf row plus feature rows

  const int cw = config_.color_width;
  for (int l = 0; l < config_.color_depth; ++l) {
    const int in = (l == 0) ? feature_dim_ + enc_dir_dim_ : cw;
    push(color_, cw, in);
  }
  push(color_, 3, cw);

  params_.setZero(offset + 1);  // final slot: log(kappa)
}

void MlpField::initialize(Rng& rng) {
  auto wmap = [&](const LayerShape& s) {
    return Eigen::Map<Eigen::MatrixXd>(params_.data() + s.w_offset, s.rows, s.cols);
  };
  auto bmap = [&](const LayerShape& s) {
    return Eigen::Map<Eigen::VectorXd>(params_.data() + s.b_offset, s.rows);
  };

  const int depth = config_.trunk_depth;
  for (int l = 0; l <= depth; ++l) {
    auto w = wmap(trunk_[l]);
    auto b = bmap(trunk_[l]);
    b.setZero();
    if (config_.geometric_init) {
      if (l == depth) {
        // output layer: sdf row approximates |x| - r at init
        const double mean = std::sqrt(M_PI) / std::sqrt(static_cast<double>(w.cols()));
        for (int i = 0; i < w.cols(); ++i) w(0, i) = mean + 1e-4 * rng.normal();
        const double sigma = std::sqrt(2.0 / w.cols());
        for (int r = 1; r < w.rows(); ++r)
          for (int c = 0; c < w.cols(); ++c) w(r, c) = sigma * rng.normal();
        b[0] = -config_.init_radius;
      } else {
        const double sigma = std::sqrt(2.0) / std::sqrt(static_cast<double>(w.rows()));
        for (int r = 0; r < w.rows(); ++r)
          for (int c = 0; c < w.cols(); ++c) w(r, c) = sigma * rng.normal();
        // encoded-frequency inputs start at zero so the init is a clean sphere
        if (l == 0) {
          for (int c = 3; c < w.cols(); ++c) w.col(c).setZero();
        } else if (l == skip_layer_) {
          const int enc_start = w.cols() - enc_pos_dim_ + 3;
          for (int c = enc_start; c < w.cols(); ++c) w.col(c).setZero();
        }
      }
    } else {
      const double sigma = std::sqrt(2.0 / (w.rows() + w.cols()));
      for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) w(r, c) = sigma * rng.normal();
    }
  }

  for (const auto& s : color_) {
    auto w = wmap(s);
    bmap(s).setZero();
    const double sigma = std::sqrt(2.0 / (w.rows() + w.cols()));
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = sigma * rng.normal();
  }

  params_[kappa_index()] = std::log(config_.kappa_init);
}

MlpField::BatchResult MlpField::forward(const Eigen::Matrix3Xd& x, const Eigen::Matrix3Xd& d,
                                        bool want_color, bool want_grad, Cache* cache) const {
  if (!x.allFinite()) throw std::invalid_argument("MlpField::forward: non-finite position");
  if (want_color) {
    if (d.cols() != x.cols())
      throw std::invalid_argument("MlpField::forward: direction batch size mismatch");
    if (!d.allFinite()) throw std::invalid_argument("MlpField::forward: non-finite direction");
  }
  const int b = static_cast<int>(x.cols());
  const double beta = config_.softplus_beta;
  const int depth = config_.trunk_depth;

  Cache local;
  Cache& cc = cache ? *cache : local;
  cc.want_grad = want_grad;
  cc.want_color = want_color;
  cc.batch = b;
  cc.trunk_a.assign(depth + 1, {});
  cc.trunk_a_tan.assign(want_grad ? depth + 1 : 0, {});
  cc.trunk_z.assign(depth, {});
  cc.trunk_z_tan.assign(want_grad ? depth : 0, {});

  encode_batch(x, config_.l_pos, cc.enc, want_grad ? &cc.enc_tan : nullptr);

  cc.trunk_a[0] = cc.enc;
  if (want_grad) cc.trunk_a_tan[0] = cc.enc_tan;

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int l = 0; l < depth; ++l) {
    if (l == skip_layer_ && l != 0) {
      Eigen::MatrixXd& a = cc.trunk_a[l];
      Eigen::MatrixXd cat(a.rows() + cc.enc.rows(), b);
      cat.topRows(a.rows()) = a;
      cat.bottomRows(cc.enc.rows()) = cc.enc;
      cat *= inv_sqrt2;
      a = std::move(cat);
      if (want_grad) {
        for (int k = 0; k < 3; ++k) {
          Eigen::MatrixXd& at = cc.trunk_a_tan[l][k];
          Eigen::MatrixXd catt(at.rows() + cc.enc.rows(), b);
          catt.topRows(at.rows()) = at;
          catt.bottomRows(cc.enc.rows()) = cc.enc_tan[k];
          catt *= inv_sqrt2;
          at = std::move(catt);
        }
      }
    }
    const auto w = weight(trunk_[l]);
    const auto bb = bias(trunk_[l]);
    cc.trunk_z[l] = (w * cc.trunk_a[l]).colwise() + bb;
    cc.trunk_a[l + 1] = apply_softplus(cc.trunk_z[l], beta);
    if (want_grad) {
      const Eigen::MatrixXd d1 = apply_d1(cc.trunk_z[l], beta);
      for (int k = 0; k < 3; ++k) {
        cc.trunk_z_tan[l][k] = w * cc.trunk_a_tan[l][k];
        cc.trunk_a_tan[l + 1][k] = d1.cwiseProduct(cc.trunk_z_tan[l][k]);
      }
    }
  }

  const auto w_out = weight(trunk_[depth]);
  const auto b_out = bias(trunk_[depth]);
  const Eigen::MatrixXd out = (w_out * cc.trunk_a[depth]).colwise() + b_out;

  BatchResult res;
  res.sdf = out.row(0).transpose();
  if (want_grad) {
    res.grad.resize(3, b);
    for (int k = 0; k < 3; ++k) res.grad.row(k) = w_out.row(0) * cc.trunk_a_tan[depth][k];
  }

  if (want_color) {
    Eigen::MatrixXd enc_d;
    encode_batch(d, config_.l_dir, enc_d, nullptr);
    const int cdepth = config_.color_depth;
    cc.color_a.assign(cdepth + 1, {});
    cc.color_z.assign(cdepth, {});
    Eigen::MatrixXd cin(feature_dim_ + enc_dir_dim_, b);
    cin.topRows(feature_dim_) = out.bottomRows(feature_dim_);
    cin.bottomRows(enc_dir_dim_) = enc_d;
    cc.color_a[0] = std::move(cin);
    for (int l = 0; l < cdepth; ++l) {
      cc.color_z[l] = (weight(color_[l]) * cc.color_a[l]).colwise() + bias(color_[l]);
      cc.color_a[l + 1] = apply_softplus(cc.color_z[l], beta);
    }
    cc.color_out = (weight(color_[cdepth]) * cc.color_a[cdepth]).colwise() + bias(color_[cdepth]);
    cc.color_val.resize(3, b);
    cc.color_val = cc.color_out.unaryExpr([](double v) { return logistic(v); });
    res.color = cc.color_val;
  }
  return res;
}

void MlpField::backward(const Cache& cc, const Eigen::VectorXd& sdf_adj,
                        const Eigen::Matrix3Xd& color_adj, const Eigen::Matrix3Xd& grad_adj,
                        Eigen::VectorXd& param_grad) const {
  if (param_grad.size() != params_.size())
    throw std::invalid_argument("MlpField::backward: param_grad size mismatch");
  const int b = cc.batch;
  const int depth = config_.trunk_depth;
  const double beta = config_.softplus_beta;
  const bool want_grad = cc.want_grad && grad_adj.size() > 0;

  auto gw = [&](const LayerShape& s) {
    return Eigen::Map<Eigen::MatrixXd>(param_grad.data() + s.w_offset, s.rows, s.cols);
  };
  auto gb = [&](const LayerShape& s) {
    return Eigen::Map<Eigen::VectorXd>(param_grad.data() + s.b_offset, s.rows);
  };

  // adjoint of the trunk output matrix [sdf; feature]
  Eigen::MatrixXd out_adj = Eigen::MatrixXd::Zero(1 + feature_dim_, b);
  if (sdf_adj.size() > 0) out_adj.row(0) = sdf_adj.transpose();

  // color head backward fills the feature adjoint rows
  if (cc.want_color && color_adj.size() > 0) {
    const int cdepth = config_.color_depth;
    Eigen::MatrixXd z_adj =
        color_adj.cwiseProduct(cc.color_val.cwiseProduct(Eigen::Matrix3Xd::Ones(3, b) - cc.color_val));
    // output layer
    gw(color_[cdepth]).noalias() += z_adj * cc.color_a[cdepth].transpose();
    gb(color_[cdepth]).noalias() += z_adj.rowwise().sum();
    Eigen::MatrixXd a_adj = weight(color_[cdepth]).transpose() * z_adj;
    for (int l = cdepth - 1; l >= 0; --l) {
      Eigen::MatrixXd zl_adj = apply_d1(cc.color_z[l], beta).cwiseProduct(a_adj);
      gw(color_[l]).noalias() += zl_adj * cc.color_a[l].transpose();
      gb(color_[l]).noalias() += zl_adj.rowwise().sum();
      a_adj = weight(color_[l]).transpose() * zl_adj;
    }
    out_adj.bottomRows(feature_dim_) += a_adj.topRows(feature_dim_);
  }

  const auto w_out = weight(trunk_[depth]);
  Eigen::MatrixXd a_adj = w_out.transpose() * out_adj;
  gw(trunk_[depth]).noalias() += out_adj * cc.trunk_a[depth].transpose();
  gb(trunk_[depth]).noalias() += out_adj.rowwise().sum();

  std::array<Eigen::MatrixXd, 3> a_tan_adj;
  if (want_grad) {
    for (int k = 0; k < 3; ++k) {
      // grad_k = w_out.row(0) * a_tan_k
      a_tan_adj[k].noalias() = w_out.row(0).transpose() * grad_adj.row(k);
      gw(trunk_[depth]).row(0).noalias() +=
          grad_adj.row(k) * cc.trunk_a_tan[depth][k].transpose();
    }
  }

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int l = depth - 1; l >= 0; --l) {
    const Eigen::MatrixXd d1 = apply_d1(cc.trunk_z[l], beta);
    Eigen::MatrixXd z_adj = d1.cwiseProduct(a_adj);
    std::array<Eigen::MatrixXd, 3> z_tan_adj;
    if (want_grad) {
      const Eigen::MatrixXd d2 = apply_d2(cc.trunk_z[l], beta);
      for (int k = 0; k < 3; ++k) {
        z_adj += d2.cwiseProduct(cc.trunk_z_tan[l][k]).cwiseProduct(a_tan_adj[k]);
        z_tan_adj[k] = d1.cwiseProduct(a_tan_adj[k]);
      }
    }
    const auto w = weight(trunk_[l]);
    gw(trunk_[l]).noalias() += z_adj * cc.trunk_a[l].transpose();
    gb(trunk_[l]).noalias() += z_adj.rowwise().sum();
    if (want_grad) {
      for (int k = 0; k < 3; ++k)
        gw(trunk_[l]).noalias() += z_tan_adj[k] * cc.trunk_a_tan[l][k].transpose();
    }
    a_adj = w.transpose() * z_adj;
    if (want_grad)
      for (int k = 0; k < 3; ++k) a_tan_adj[k] = w.transpose() * z_tan_adj[k];

    if (l == skip_layer_ && l != 0) {
      // undo the concat: keep the hidden part, drop the encoding part
      const int hidden_rows = static_cast<int>(a_adj.rows()) - enc_pos_dim_;
      a_adj = (inv_sqrt2 * a_adj.topRows(hidden_rows)).eval();
      if (want_grad)
        for (int k = 0; k < 3; ++k)
          a_tan_adj[k] = (inv_sqrt2 * a_tan_adj[k].topRows(hidden_rows)).eval();
    }
  }
}

Eigen::VectorXd MlpField::sdf_batch(const Eigen::Matrix3Xd& x) const {
  return forward(x, Eigen::Matrix3Xd(), false, false).sdf;
}

FieldSample MlpField::query(const Vec3& x, const Vec3& d) const {
  Eigen::Matrix3Xd xm(3, 1), dm(3, 1);
  xm.col(0) = x;
  dm.col(0) = d;
  const BatchResult r = forward(xm, dm, true, false);
  return FieldSample{r.sdf[0], r.color.col(0)};
}

Vec3 MlpField::sdf_gradient(const Vec3& x) const {
  Eigen::Matrix3Xd xm(3, 1);
  xm.col(0) = x;
  const BatchResult r = forward(xm, Eigen::Matrix3Xd(), false, true);
  return r.grad.col(0);
}

double MlpField::sdf(const Vec3& x) const {
  Eigen::Matrix3Xd xm(3, 1);
  xm.col(0) = x;
  return forward(xm, Eigen::Matrix3Xd(), false, false).sdf[0];
}

}  // namespace rsdf
