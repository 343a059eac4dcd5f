#include "rsdf/evalkit.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rsdf/kdtree.hpp"
#include "rsdf/marching_cubes.hpp"

namespace rsdf {

TriangleMesh extract_mesh(const SdfColorField& field, const SceneTransform& transform,
                          const Aabb& world_box, int resolution) {
  if (resolution < 8) throw std::invalid_argument("extract_mesh: resolution must be >= 8");
  const int n = resolution + 1;
  const Vec3 cell = world_box.extent() / resolution;

  // The SDF is a similarity image of the world, so linear interpolation of
  // grid samples in world coordinates is exact in the same sense it would be
  // in the normalized cube.
  std::vector<double> values(static_cast<std::size_t>(n) * n * n);
  const auto* mlp = dynamic_cast<const MlpField*>(&field);
  if (mlp != nullptr) {
    // one z-column at a time keeps the batched path hot without a huge matrix
    Eigen::Matrix3Xd pts(3, n);
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        for (int iz = 0; iz < n; ++iz) {
          const Vec3 world(world_box.min.x() + ix * cell.x(), world_box.min.y() + iy * cell.y(),
                           world_box.min.z() + iz * cell.z());
          pts.col(iz) = transform.to_normalized(world);
        }
        const Eigen::VectorXd sdf = mlp->sdf_batch(pts);
        for (int iz = 0; iz < n; ++iz) values[idx++] = sdf[iz];
      }
    }
  } else {
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
          const Vec3 world(world_box.min.x() + ix * cell.x(), world_box.min.y() + iy * cell.y(),
                           world_box.min.z() + iz * cell.z());
          values[idx++] = field.sdf(transform.to_normalized(world));
        }
  }
  return extract_isosurface_grid(values, world_box, resolution, 0.0);
}

PointCloud sample_mesh_points(const TriangleMesh& mesh, int n, std::uint64_t seed) {
  if (mesh.faces.empty()) throw std::invalid_argument("sample_mesh_points: empty mesh");
  if (n < 1) throw std::invalid_argument("sample_mesh_points: n must be >= 1");

  // cumulative areas for the inverse-CDF face draw
  std::vector<double> cum(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cum[f] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_mesh_points: zero-area mesh");

  Rng rng(seed);
  PointCloud out;
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), pick);
    const std::size_t f = std::min<std::size_t>(it - cum.begin(), mesh.faces.size() - 1);
    const Vec3& a = mesh.vertices[mesh.faces[f][0]];
    const Vec3& b = mesh.vertices[mesh.faces[f][1]];
    const Vec3& c = mesh.vertices[mesh.faces[f][2]];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {  // fold back into the triangle
      u = 1.0 - u;
      v = 1.0 - v;
    }
    out.points.push_back(a + u * (b - a) + v * (c - a));
  }
  return out;
}

namespace {

// mean nearest-neighbor distance (meters) from each query point into the tree
double mean_nn_distance(const std::vector<Vec3>& queries, const KdTree& tree) {
  double sum = 0.0;
  for (const Vec3& q : queries) sum += tree.nearest(q).distance;
  return sum / static_cast<double>(queries.size());
}

double fraction_within(const std::vector<Vec3>& queries, const KdTree& tree, double radius_m) {
  std::size_t hits = 0;
  for (const Vec3& q : queries)
    if (tree.nearest(q).distance <= radius_m) ++hits;
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace

double chamfer_l1(const PointCloud& pred, const PointCloud& gt) {
  if (pred.empty() || gt.empty()) throw std::invalid_argument("chamfer_l1: empty point cloud");
  const KdTree pred_tree(pred.points);
  const KdTree gt_tree(gt.points);
  const double meters =
      0.5 * (mean_nn_distance(pred.points, gt_tree) + mean_nn_distance(gt.points, pred_tree));
  return meters * 100.0;
}

MetricReport precision_recall_fscore(const PointCloud& pred, const PointCloud& gt, double tau_cm) {
  if (pred.empty() || gt.empty())
    throw std::invalid_argument("precision_recall_fscore: empty point cloud");
  if (!(tau_cm > 0.0)) throw std::invalid_argument("precision_recall_fscore: tau must be > 0");

  const double tau_m = tau_cm / 100.0;
  const KdTree pred_tree(pred.points);
  const KdTree gt_tree(gt.points);

  MetricReport r;
  r.tau_cm = tau_cm;
  r.pred_samples = static_cast<int>(pred.size());
  r.gt_samples = static_cast<int>(gt.size());
  r.precision = 100.0 * fraction_within(pred.points, gt_tree, tau_m);
  r.recall = 100.0 * fraction_within(gt.points, pred_tree, tau_m);
  const double denom = r.precision + r.recall;
  r.fscore = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

MetricReport evaluate_mesh(const TriangleMesh& pred_mesh, const TriangleMesh& gt_mesh,
                           const EvalOptions& options) {
  if (pred_mesh.faces.empty()) {
    MetricReport r;
    r.tau_cm = options.tau_cm;
    r.empty_mesh = true;
    return r;
  }
  const PointCloud pred = sample_mesh_points(pred_mesh, options.mesh_samples, options.sample_seed);
  const PointCloud gt = sample_mesh_points(gt_mesh, options.mesh_samples, options.sample_seed + 1);
  MetricReport r = precision_recall_fscore(pred, gt, options.tau_cm);
  r.cd_l1_cm = chamfer_l1(pred, gt);
  return r;
}

MetricReport evaluate(const Checkpoint& ckpt, const DatasetBundle& bundle,
                      const EvalOptions& options) {
  const MlpField field = field_from_checkpoint(ckpt);
  const TriangleMesh pred =
      extract_mesh(field, ckpt.transform, ckpt.mesh_box(), options.grid_resolution);
  return evaluate_mesh(pred, bundle.gt_mesh, options);
}

void write_metric_csv(const MetricReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_metric_csv: cannot open " + path);
  os << "cd_l1_cm,precision,recall,fscore,tau_cm,pred_samples,gt_samples,empty_mesh\n";
  os << report.cd_l1_cm << ',' << report.precision << ',' << report.recall << ','
     << report.fscore << ',' << report.tau_cm << ',' << report.pred_samples << ','
     << report.gt_samples << ',' << (report.empty_mesh ? 1 : 0) << '\n';
}

}  // namespace rsdf
