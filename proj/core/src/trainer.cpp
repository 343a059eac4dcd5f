#include "rsdf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rsdf {

void TrainConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("TrainConfig: negative iteration count");
  if (ray_batch < 1 || n_samples < 2 || eikonal_batch < 2)
    throw std::invalid_argument("TrainConfig: batch sizes too small");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (lambda_radar < 0.0 || lambda_radar > 1.0)
    throw std::invalid_argument("TrainConfig: lambda must be in [0, 1]");
  loss_weights.validate();
  field.validate();
}

Trainer::Trainer(const DatasetBundle& dataset, const TrainConfig& config)
    : dataset_(dataset), config_(config), field_(config.field), rng_(config.seed) {
  config_.validate();
  if (dataset_.images.empty()) throw std::invalid_argument("Trainer: dataset has no images");
  if (dataset_.images.size() != dataset_.cameras.size())
    throw std::invalid_argument("Trainer: image/camera count mismatch");
  if (config_.loss_weights.beta_surface > 0.0 && dataset_.cloud.empty())
    throw std::invalid_argument("Trainer: surface loss enabled but the radar cloud is empty");
  if (config_.surface_batch == 0) config_.surface_batch = config_.ray_batch;

  // normalization cube and radar-derived sampling volume, both from the cloud
  // unless the caller pins the volume explicitly
  if (config_.use_explicit_bounds) {
    radar_bounds_.horizontal = config_.explicit_bounds;
    radar_bounds_.z_ground = config_.explicit_bounds.min.z();
    radar_bounds_.z_top = config_.explicit_bounds.max.z();
  } else {
    radar_bounds_ = derive_scene_bounds(dataset_.cloud, config_.bounds_margin_horizontal,
                                        config_.bounds_margin_vertical);
  }
  const Aabb box = radar_bounds_.box();
  transform_.center = box.center();
  transform_.scale = 0.5 * box.extent().maxCoeff() * (1.0 + config_.cube_padding);

  for (std::size_t i = 0; i < dataset_.cameras.size(); ++i) {
    RadarMask m = build_radar_mask(dataset_.cameras[i], dataset_.cloud, config_.mask_dilation);
    m.image_id = static_cast<int>(i);
    masks_.push_back(std::move(m));
  }
  mask_index_ = RadarMaskIndex::build(masks_);

  Rng init_rng(config_.seed ^ 0x9e3779b97f4a7c15ull);
  field_ = MlpField(config_.field, &init_rng);

  adam_m_.setZero(field_.param_count());
  adam_v_.setZero(field_.param_count());
}

double Trainer::effective_beta_surface() const {
  const double beta = config_.loss_weights.beta_surface;
  if (config_.warmup_iterations <= 0 || iteration_ >= config_.warmup_iterations) return beta;
  return beta * static_cast<double>(iteration_) / config_.warmup_iterations;
}

double Trainer::current_learning_rate() const {
  const double frac = config_.lr_final_fraction;
  const double progress =
      config_.iterations > 0 ? static_cast<double>(iteration_) / config_.iterations : 0.0;
  return config_.learning_rate * (frac + (1.0 - frac) * 0.5 * (1.0 + std::cos(M_PI * progress)));
}

std::optional<Trainer::RayWork> Trainer::prepare_ray(const PixelRef& pixel) const {
  const CameraModel& cam = dataset_.cameras[pixel.image_id];
  RayWork work;
  work.ray = generate_ray(cam, pixel.u + 0.5, pixel.v + 0.5);
  std::optional<std::pair<double, double>> bounds;
  if (config_.ray_bounding) {
    bounds = compute_ray_bounds(work.ray, radar_bounds_);
  } else {
    bounds = intersect_aabb(work.ray, transform_.world_cube());
  }
  if (!bounds || !(bounds->second - bounds->first > 1e-9)) return std::nullopt;
  work.t_near = bounds->first;
  work.t_far = bounds->second;
  const Image& img = dataset_.images[pixel.image_id];
  for (int c = 0; c < 3; ++c) work.gt_color[c] = img.at(pixel.u, pixel.v, c) / 255.0;
  return work;
}

IterationLog Trainer::step() {
  RaySelectionConfig sel;
  sel.rays_per_iteration = config_.ray_batch;
  sel.lambda_radar = config_.lambda_radar;
  sel.dilation_radius = config_.mask_dilation;

  std::vector<PixelRef> pixels;
  int rejected = 0;
  for (int round = 0; round < 5 && static_cast<int>(pixels.size()) < config_.ray_batch; ++round) {
    sel.rays_per_iteration = config_.ray_batch - static_cast<int>(pixels.size());
    for (const PixelRef& p : select_rays(mask_index_, sel, rng_)) {
      if (prepare_ray(p)) {
        pixels.push_back(p);
      } else {
        ++rejected;
      }
    }
  }
  if (pixels.empty()) throw std::runtime_error("Trainer::step: no ray hits the sampling volume");
  return step_with_pixels(pixels, rejected);
}

IterationLog Trainer::step_with_pixels(const std::vector<PixelRef>& pixels, int rejected_count) {
  const auto t_start = std::chrono::steady_clock::now();
  const double beta_surface = effective_beta_surface();
  const double beta_eik = config_.loss_weights.beta_eik;
  const int n = config_.n_samples;
  const double kappa = field_.kappa();

  std::vector<RayWork> rays;
  std::vector<RaySamples> samples;
  for (const PixelRef& p : pixels) {
    auto work = prepare_ray(p);
    if (!work) {
      ++rejected_count;
      continue;
    }
    samples.push_back(sample_stratified(work->t_near, work->t_far, n, rng_, config_.jitter));
    rays.push_back(*work);
  }
  if (rays.empty()) throw std::runtime_error("Trainer: empty ray batch");
  const int p = static_cast<int>(rays.size());

  // batched field evaluation at all ray samples (normalized frame)
  Eigen::Matrix3Xd x(3, p * n), d(3, p * n);
  for (int r = 0; r < p; ++r) {
    for (int i = 0; i < n; ++i) {
      const Vec3 w = rays[r].ray.origin + samples[r].t[i] * rays[r].ray.direction;
      x.col(r * n + i) = transform_.to_normalized(w);
      d.col(r * n + i) = rays[r].ray.direction;
    }
  }
  MlpField::Cache cache;
  const auto fwd = field_.forward(x, d, true, false, &cache);

  Eigen::VectorXd param_grad = Eigen::VectorXd::Zero(field_.param_count());
  Eigen::VectorXd sdf_adj = Eigen::VectorXd::Zero(p * n);
  Eigen::Matrix3Xd color_adj = Eigen::Matrix3Xd::Zero(3, p * n);
  double kappa_adj = 0.0;
  double color_loss_acc = 0.0;

  std::vector<double> alphas(n - 1);
  std::vector<Vec3> seg_colors(n - 1);
  std::vector<OpacityGrad> opacity_grads(n - 1);
  std::vector<double> alpha_adj;
  std::vector<Vec3> seg_color_adj;

  for (int r = 0; r < p; ++r) {
    const int base = r * n;
    for (int i = 0; i + 1 < n; ++i) {
      alphas[i] =
          sdf_to_opacity_grad(fwd.sdf[base + i], fwd.sdf[base + i + 1], kappa, opacity_grads[i]);
      seg_colors[i] = fwd.color.col(base + i);
    }
    const RenderOutput out = composite(alphas, seg_colors);
    const Vec3 diff = out.color - rays[r].gt_color;
    color_loss_acc += diff.cwiseAbs().sum();
    // d(mean L1)/d(c_hat)
    Vec3 up;
    for (int c = 0; c < 3; ++c) up[c] = (diff[c] > 0.0 ? 1.0 : (diff[c] < 0.0 ? -1.0 : 0.0));
    up /= 3.0 * p;
    composite_backward(alphas, seg_colors, out, up, alpha_adj, seg_color_adj);
    for (int i = 0; i + 1 < n; ++i) {
      sdf_adj[base + i] += alpha_adj[i] * opacity_grads[i].d_s;
      sdf_adj[base + i + 1] += alpha_adj[i] * opacity_grads[i].d_s_next;
      kappa_adj += alpha_adj[i] * opacity_grads[i].d_kappa;
      color_adj.col(base + i) += seg_color_adj[i];
    }
  }
  const double loss_color = color_loss_acc / (3.0 * p);
  field_.backward(cache, sdf_adj, color_adj, Eigen::Matrix3Xd(), param_grad);
  param_grad[field_.kappa_index()] += kappa_adj * kappa;  // log-parameterization chain

  // eikonal batch: half existing ray samples, half uniform cube draws
  double loss_eik = 0.0;
  if (beta_eik > 0.0) {
    const int e = config_.eikonal_batch;
    Eigen::Matrix3Xd ex(3, e);
    const int half = e / 2;
    for (int i = 0; i < half; ++i)
      ex.col(i) = x.col(static_cast<int>(rng_.uniform_index(static_cast<std::uint64_t>(p) * n)));
    for (int i = half; i < e; ++i)
      ex.col(i) = Vec3(rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0));
    MlpField::Cache ecache;
    const auto efwd = field_.forward(ex, Eigen::Matrix3Xd(), false, true, &ecache);
    Eigen::Matrix3Xd grad_adj(3, e);
    for (int i = 0; i < e; ++i) {
      const double norm = efwd.grad.col(i).norm();
      const double dev = norm - 1.0;
      loss_eik += dev * dev;
      grad_adj.col(i) = norm > 1e-12
                            ? Vec3(beta_eik * 2.0 * dev / e * efwd.grad.col(i) / norm)
                            : Vec3::Zero();
    }
    loss_eik /= e;
    field_.backward(ecache, Eigen::VectorXd(), Eigen::Matrix3Xd(), grad_adj, param_grad);
  }

  // surface batch: random radar subsample, pre-normalized
  double loss_surface = 0.0;
  if (beta_surface > 0.0 || (config_.loss_weights.beta_surface > 0.0 && iteration_ == 0)) {
    const int s = std::min<int>(config_.surface_batch, static_cast<int>(dataset_.cloud.size()));
    if (s > 0) {
      Eigen::Matrix3Xd sx(3, s);
      for (int i = 0; i < s; ++i)
        sx.col(i) = transform_.to_normalized(
            dataset_.cloud.points[rng_.uniform_index(dataset_.cloud.size())]);
      MlpField::Cache scache;
      const auto sfwd = field_.forward(sx, Eigen::Matrix3Xd(), false, false, &scache);
      loss_surface = sfwd.sdf.cwiseAbs().mean();
      if (beta_surface > 0.0) {
        Eigen::VectorXd s_adj(s);
        for (int i = 0; i < s; ++i)
          s_adj[i] = beta_surface / s * (sfwd.sdf[i] > 0.0 ? 1.0 : (sfwd.sdf[i] < 0.0 ? -1.0 : 0.0));
        field_.backward(scache, s_adj, Eigen::Matrix3Xd(), Eigen::Matrix3Xd(), param_grad);
      }
    }
  }

  LossWeights effective = config_.loss_weights;
  effective.beta_surface = beta_surface;
  const LossBreakdown breakdown = total_loss(loss_color, loss_surface, loss_eik, effective);
  if (!std::isfinite(breakdown.color))
    throw std::runtime_error("Trainer: non-finite color loss at iteration " +
                             std::to_string(iteration_));
  if (!std::isfinite(breakdown.surface))
    throw std::runtime_error("Trainer: non-finite surface loss at iteration " +
                             std::to_string(iteration_));
  if (!std::isfinite(breakdown.eikonal))
    throw std::runtime_error("Trainer: non-finite eikonal loss at iteration " +
                             std::to_string(iteration_));

  adam_update(param_grad);
  ++iteration_;

  IterationLog log;
  log.iteration = iteration_;
  log.loss = breakdown;
  log.kappa = field_.kappa();
  log.rays_rejected = rejected_count;
  log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t_start)
                    .count();
  return log;
}

void Trainer::adam_update(const Eigen::VectorXd& grad) {
  const double lr = current_learning_rate();
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++adam_t_;
  adam_m_ = b1 * adam_m_ + (1.0 - b1) * grad;
  adam_v_ = b2 * adam_v_.array().matrix() + (1.0 - b2) * grad.array().square().matrix();
  const double corr1 = 1.0 - std::pow(b1, adam_t_);
  const double corr2 = 1.0 - std::pow(b2, adam_t_);
  field_.params().array() -=
      lr * (adam_m_.array() / corr1) / ((adam_v_.array() / corr2).sqrt() + eps);
}

std::vector<IterationLog> Trainer::run(const EvalHook& hook) {
  std::vector<IterationLog> logs;
  for (int i = 0; i < config_.iterations; ++i) {
    IterationLog log = step();
    if (config_.log_every > 0 &&
        (log.iteration % config_.log_every == 0 || log.iteration == config_.iterations))
      logs.push_back(log);
    if (hook && config_.eval_every > 0 &&
        (log.iteration % config_.eval_every == 0 || log.iteration == config_.iterations))
      hook(log.iteration, *this);
  }
  return logs;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.field_config = config_.field;
  c.params = field_.params();
  c.transform = transform_;
  c.scene_box = radar_bounds_.box();
  c.train_config = config_;
  c.iteration = iteration_;
  c.rng_state = rng_.serialize();
  return c;
}

MlpField field_from_checkpoint(const Checkpoint& ckpt) {
  MlpField field(ckpt.field_config);
  if (field.params().size() != ckpt.params.size())
    throw std::runtime_error("field_from_checkpoint: parameter count mismatch");
  field.params() = ckpt.params;
  return field;
}

void write_log_csv(const std::vector<IterationLog>& logs, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_log_csv: cannot open " + path);
  os << "iteration,color_loss,surface_loss,eikonal_loss,total_loss,kappa,wall_ms,rays_rejected\n";
  os.precision(17);
  for (const IterationLog& l : logs)
    os << l.iteration << ',' << l.loss.color << ',' << l.loss.surface << ',' << l.loss.eikonal
       << ',' << l.loss.total << ',' << l.kappa << ',' << l.wall_ms << ',' << l.rays_rejected
       << '\n';
}

}  // namespace rsdf
