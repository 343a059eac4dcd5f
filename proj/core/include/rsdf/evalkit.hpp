#pragma once

#include <string>

#include "rsdf/field.hpp"
#include "rsdf/geometry.hpp"
#include "rsdf/rng.hpp"
#include "rsdf/trainer.hpp"

namespace rsdf {

// Reconstruction accuracy of a predicted surface against ground truth.
// Chamfer distance here is the symmetric mean Euclidean nearest-neighbor
// distance between the two sampled point sets, reported in centimeters;
// precision/recall/F-score are percentages at the distance threshold tau.
struct MetricReport {
  double cd_l1_cm = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  double tau_cm = 100.0;
  int pred_samples = 0;
  int gt_samples = 0;
  bool empty_mesh = false;
};

// Marching-cubes surface of the field's zero level set over the world-space
// box. The field is queried in normalized coordinates via the transform; the
// returned mesh is in world meters. Throws if resolution < 8.
TriangleMesh extract_mesh(const SdfColorField& field, const SceneTransform& transform,
                          const Aabb& world_box, int resolution);

// Area-weighted uniform surface sampling, deterministic per seed.
// Throws on an empty mesh or n < 1.
PointCloud sample_mesh_points(const TriangleMesh& mesh, int n, std::uint64_t seed);

// Symmetric mean nearest-neighbor distance in cm. Throws on empty clouds.
double chamfer_l1(const PointCloud& pred, const PointCloud& gt);

// Precision: % of pred points within tau of gt; recall the reverse;
// F = 2PR/(P+R), 0 when both vanish. tau_cm > 0 required. Distances are
// computed in meters and compared against tau/100.
MetricReport precision_recall_fscore(const PointCloud& pred, const PointCloud& gt, double tau_cm);

struct EvalOptions {
  int grid_resolution = 256;
  int mesh_samples = 100000;
  double tau_cm = 100.0;
  std::uint64_t sample_seed = 7;
};

// Full protocol: extract the mesh from the checkpointed field, sample both it
// and the bundle's ground-truth mesh, and score. An empty extracted mesh
// yields a zeroed report with the empty_mesh flag set rather than an error.
MetricReport evaluate(const Checkpoint& ckpt, const DatasetBundle& bundle,
                      const EvalOptions& options = {});

// As above but for an already-extracted prediction mesh (world meters).
MetricReport evaluate_mesh(const TriangleMesh& pred_mesh, const TriangleMesh& gt_mesh,
                           const EvalOptions& options = {});

// Single-row CSV with header.
void write_metric_csv(const MetricReport& report, const std::string& path);

}  // namespace rsdf
