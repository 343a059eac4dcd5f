#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rsdf/field.hpp"
#include "rsdf/losses.hpp"
#include "rsdf/ray_strategy.hpp"
#include "rsdf/renderer.hpp"
#include "rsdf/scene_forge.hpp"

namespace rsdf {

/// Similarity mapping between world meters and the normalized [-1,1]^3 cube
/// the field lives in: world = center + scale * normalized.
struct SceneTransform {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 to_normalized(const Vec3& world) const { return (world - center) / scale; }
  Vec3 to_world(const Vec3& normalized) const { return center + scale * normalized; }
  Aabb world_cube() const {
    return Aabb{center - Vec3::Constant(scale), center + Vec3::Constant(scale)};
  }
};

struct TrainConfig {
  int iterations = 5000;
  int ray_batch = 64;   // P, rays per iteration
  int n_samples = 32;   // samples per ray
  double learning_rate = 5e-4;
  double lr_final_fraction = 0.05;  // cosine decay floor
  LossWeights loss_weights;
  double lambda_radar = 0.4;  // radar ray fraction for structure-aware selection
  int mask_dilation = 2;
  bool ray_bounding = true;  // radar-derived interval vs fixed cube
  int eikonal_batch = 256;   // half ray samples, half uniform cube draws
  int surface_batch = 0;     // 0 means ray_batch
  int warmup_iterations = 500;
  std::uint64_t seed = 0;
  int log_every = 10;
  int checkpoint_every = 0;  // 0: final only
  int eval_every = 0;        // 0: off; cadence of the metric hook
  double bounds_margin_horizontal = 0.05;
  double bounds_margin_vertical = 0.2;
  double cube_padding = 0.15;  // margin of the normalization cube
  bool use_explicit_bounds = false;  // bypass the radar-derived volume
  Aabb explicit_bounds;
  bool jitter = true;
  FieldConfig field;

  void validate() const;
};

struct IterationLog {
  int iteration = 0;
  LossBreakdown loss;
  double kappa = 0.0;
  double wall_ms = 0.0;
  int rays_rejected = 0;
};

struct Checkpoint {
  FieldConfig field_config;
  Eigen::VectorXd params;
  SceneTransform transform;
  Aabb scene_box;  // supervised world region; meshing outside it is meaningless
  TrainConfig train_config;
  int iteration = 0;
  std::string rng_state;

  // scene_box when it is usable, otherwise the full normalization cube
  Aabb mesh_box() const {
    return scene_box.valid() && scene_box.extent().minCoeff() > 0.0 ? scene_box
                                                                    : transform.world_cube();
  }
};

// Binary blob with 8-byte magic header "RSDF0001"; reload reproduces
// bit-identical field queries. Throws on bad magic or truncation.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
MlpField field_from_checkpoint(const Checkpoint& ckpt);

class Trainer {
 public:
  Trainer(const DatasetBundle& dataset, const TrainConfig& config);

  // One gradient step on the total objective. Rays rejected by bounding are
  // replaced by redrawing (up to 5 rounds) so the effective batch stays P.
  IterationLog step();

  // Same step on a caller-supplied pixel batch; rays that miss the sampling
  // volume are dropped rather than redrawn.
  IterationLog step_with_pixels(const std::vector<PixelRef>& pixels, int rejected_count = 0);

  using EvalHook = std::function<void(int iteration, const Trainer&)>;
  std::vector<IterationLog> run(const EvalHook& hook = nullptr);

  const MlpField& field() const { return field_; }
  const SceneTransform& transform() const { return transform_; }
  const SceneBounds& radar_bounds() const { return radar_bounds_; }
  int iteration() const { return iteration_; }
  Checkpoint checkpoint() const;

 private:
  struct RayWork {
    Ray ray;
    double t_near, t_far;
    Vec3 gt_color;
  };

  std::optional<RayWork> prepare_ray(const PixelRef& pixel) const;
  double effective_beta_surface() const;
  double current_learning_rate() const;
  void adam_update(const Eigen::VectorXd& grad);

  const DatasetBundle& dataset_;
  TrainConfig config_;
  SceneTransform transform_;
  SceneBounds radar_bounds_;
  std::vector<RadarMask> masks_;
  RadarMaskIndex mask_index_;
  MlpField field_;
  Rng rng_;
  int iteration_ = 0;

  Eigen::VectorXd adam_m_, adam_v_;
  int adam_t_ = 0;
};

void write_log_csv(const std::vector<IterationLog>& logs, const std::string& path);

}  // namespace rsdf
