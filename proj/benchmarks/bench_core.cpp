#include <benchmark/benchmark.h>

#include "rsdf/analytic_field.hpp"
#include "rsdf/kdtree.hpp"
#include "rsdf/marching_cubes.hpp"
#include "rsdf/renderer.hpp"

using namespace rsdf;

namespace {

FieldConfig bench_field_config() {
  FieldConfig cfg;
  cfg.l_pos = 4;
  cfg.l_dir = 2;
  cfg.trunk_width = 64;
  cfg.trunk_depth = 3;
  cfg.color_width = 32;
  cfg.color_depth = 2;
  return cfg;
}

void bm_field_forward(benchmark::State& state) {
  Rng rng(1);
  const MlpField field(bench_field_config(), &rng);
  const int n = static_cast<int>(state.range(0));
  Eigen::Matrix3Xd x(3, n), d(3, n);
  for (int i = 0; i < n; ++i) {
    x.col(i) = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    d.col(i) = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(field.forward(x, d, true, true));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_render_ray(benchmark::State& state) {
  Rng rng(2);
  const MlpField field(bench_field_config(), &rng);
  Ray ray;
  ray.origin = Vec3(0, 0, -1.5);
  ray.direction = Vec3(0.1, 0.0, 1.0).normalized();
  RenderConfig cfg;
  cfg.n_samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_ray(field, ray, {0.2, 3.0}, cfg, rng));
  }
}

void bm_kdtree_query(benchmark::State& state) {
  Rng rng(3);
  std::vector<Vec3> pts;
  for (int i = 0; i < state.range(0); ++i)
    pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const KdTree tree(pts);
  for (auto _ : state) {
    const Vec3 q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    benchmark::DoNotOptimize(tree.nearest(q));
  }
}

void bm_marching_cubes(benchmark::State& state) {
  const AnalyticField sphere = AnalyticField::sphere(Vec3::Zero(), 0.5);
  const Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        extract_isosurface([&](const Vec3& p) { return sphere.sdf(p); }, box, res));
  }
}

BENCHMARK(bm_field_forward)->Arg(32)->Arg(256)->Arg(1024);
BENCHMARK(bm_render_ray)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(bm_kdtree_query)->Arg(1000)->Arg(100000);
BENCHMARK(bm_marching_cubes)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
