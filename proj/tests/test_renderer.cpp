#include <doctest.h>

#include "rsdf/analytic_field.hpp"
#include "rsdf/renderer.hpp"

using namespace rsdf;

TEST_CASE("stratified sampling midpoints with jitter off") {
  Rng rng(0);
  const RaySamples s = sample_stratified(0.0, 1.0, 4, rng, false);
  REQUIRE(s.t.size() == 4);
  CHECK(s.t[0] == doctest::Approx(0.125));
  CHECK(s.t[1] == doctest::Approx(0.375));
  CHECK(s.t[2] == doctest::Approx(0.625));
  CHECK(s.t[3] == doctest::Approx(0.875));
  REQUIRE(s.delta.size() == 3);
  for (double d : s.delta) CHECK(d == doctest::Approx(0.25));
}

TEST_CASE("stratified samples stay inside their bins") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 16;
    const double lo = 2.0, hi = 5.0;
    const RaySamples s = sample_stratified(lo, hi, n, rng, true);
    const double bin = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      CHECK(s.t[i] >= lo + i * bin);
      CHECK(s.t[i] <= lo + (i + 1) * bin);
    }
  }
}

TEST_CASE("stratified sampling is deterministic per seed") {
  Rng a(33), b(33);
  const RaySamples sa = sample_stratified(0.0, 2.0, 32, a, true);
  const RaySamples sb = sample_stratified(0.0, 2.0, 32, b, true);
  CHECK(sa.t == sb.t);
}

TEST_CASE("stratified sampling rejects inverted bounds") {
  Rng rng(0);
  CHECK_THROWS(sample_stratified(1.0, 0.5, 8, rng));
  CHECK_THROWS(sample_stratified(0.0, 1.0, 1, rng));
}

TEST_CASE("opacity is zero when the SDF does not decrease") {
  CHECK(sdf_to_opacity(0.3, 0.3, 20.0) == 0.0);
  CHECK(sdf_to_opacity(0.2, 0.4, 20.0) == 0.0);
}

TEST_CASE("opacity closed-form hand value") {
  // phi(1) = 0.73106, phi(-1) = 0.26894 at kappa 1
  CHECK(sdf_to_opacity(1.0, -1.0, 1.0) == doctest::Approx(0.63212).epsilon(1e-4));
}

TEST_CASE("opacity rejects non-positive kappa") {
  CHECK_THROWS(sdf_to_opacity(0.1, -0.1, 0.0));
  CHECK_THROWS(sdf_to_opacity(0.1, -0.1, -2.0));
}

TEST_CASE("opacity matches the logistic oracle on 1000 random pairs") {
  Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    const double s_i = rng.uniform(-2, 2);
    const double s_next = rng.uniform(-2, 2);
    const double kappa = rng.uniform(0.5, 300.0);
    auto phi = [&](double v) { return 1.0 / (1.0 + std::exp(-kappa * v)); };
    // the floor is applied to phi(s_i) before the division enters the formula
    const double phi_i = std::max(phi(s_i), 1e-7);
    const double expected = std::max((phi_i - phi(s_next)) / phi_i, 0.0);
    CHECK(sdf_to_opacity(s_i, s_next, kappa) == doctest::Approx(expected).epsilon(1e-9));
    const double alpha = sdf_to_opacity(s_i, s_next, kappa);
    CHECK(alpha >= 0.0);
    CHECK(alpha <= 1.0);
  }
}

TEST_CASE("opacity gradient matches finite differences") {
  Rng rng(55);
  for (int i = 0; i < 300; ++i) {
    const double s_i = rng.uniform(-1, 1);
    const double s_next = rng.uniform(-1, 1);
    const double kappa = rng.uniform(1.0, 60.0);
    if (std::abs(s_i - s_next) < 1e-3) continue;  // kink of the clamp
    OpacityGrad g;
    sdf_to_opacity_grad(s_i, s_next, kappa, g);
    const double h = 1e-6;
    const double fd_s =
        (sdf_to_opacity(s_i + h, s_next, kappa) - sdf_to_opacity(s_i - h, s_next, kappa)) / (2 * h);
    const double fd_n =
        (sdf_to_opacity(s_i, s_next + h, kappa) - sdf_to_opacity(s_i, s_next - h, kappa)) / (2 * h);
    const double fd_k =
        (sdf_to_opacity(s_i, s_next, kappa + h) - sdf_to_opacity(s_i, s_next, kappa - h)) / (2 * h);
    CHECK(std::abs(g.d_s - fd_s) < 1e-5 * std::max(1.0, std::abs(fd_s)));
    CHECK(std::abs(g.d_s_next - fd_n) < 1e-5 * std::max(1.0, std::abs(fd_n)));
    CHECK(std::abs(g.d_kappa - fd_k) < 1e-5 * std::max(1.0, std::abs(fd_k)));
  }
}

TEST_CASE("composite of a vacuum ray") {
  const RenderOutput out = composite({0.0, 0.0, 0.0}, {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
  CHECK(out.color.norm() == 0.0);
  CHECK(out.weights.sum() == 0.0);
}

TEST_CASE("composite with an opaque first segment") {
  const RenderOutput out = composite({1.0, 0.5}, {Vec3(0.2, 0.4, 0.6), Vec3(1, 1, 1)});
  CHECK(out.weights[0] == doctest::Approx(1.0));
  CHECK(out.weights[1] == doctest::Approx(0.0));
  CHECK((out.color - Vec3(0.2, 0.4, 0.6)).norm() < 1e-12);
}

TEST_CASE("composite two-step hand case") {
  const RenderOutput out = composite({0.5, 0.5}, {Vec3(1, 0, 0), Vec3(0, 1, 0)});
  CHECK(out.weights[0] == doctest::Approx(0.5));
  CHECK(out.weights[1] == doctest::Approx(0.25));
  CHECK((out.color - Vec3(0.5, 0.25, 0)).norm() < 1e-12);
}

TEST_CASE("composite rejects out-of-range alphas") {
  CHECK_THROWS(composite({1.2}, {Vec3::Zero()}));
  CHECK_THROWS(composite({-0.1}, {Vec3::Zero()}));
}

TEST_CASE("composite matches a loop oracle on 1000 random sequences") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(12));
    std::vector<double> alphas(n);
    std::vector<Vec3> colors(n);
    for (int i = 0; i < n; ++i) {
      alphas[i] = rng.uniform();
      colors[i] = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    }
    const RenderOutput out = composite(alphas, colors);

    double T = 1.0;
    Vec3 c = Vec3::Zero();
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(out.transmittance[i] == doctest::Approx(T).epsilon(1e-12));
      const double w = T * alphas[i];
      CHECK(out.weights[i] == doctest::Approx(w).epsilon(1e-12));
      c += w * colors[i];
      wsum += w;
      T *= 1.0 - alphas[i];
    }
    CHECK((out.color - c).norm() < 1e-9);
    CHECK(wsum <= 1.0 + 1e-6);
    for (int i = 1; i < n; ++i) CHECK(out.transmittance[i] <= out.transmittance[i - 1] + 1e-12);
  }
}

TEST_CASE("composite with one sample degenerates to alpha * color") {
  const RenderOutput out = composite({0.3}, {Vec3(0.6, 0.2, 0.9)});
  CHECK((out.color - 0.3 * Vec3(0.6, 0.2, 0.9)).norm() < 1e-12);
}

TEST_CASE("composite_backward matches finite differences") {
  Rng rng(91);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(6));
    std::vector<double> alphas(n);
    std::vector<Vec3> colors(n);
    for (int i = 0; i < n; ++i) {
      alphas[i] = rng.uniform(0.05, 0.9);
      colors[i] = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    }
    const Vec3 adj(rng.normal(), rng.normal(), rng.normal());
    const RenderOutput out = composite(alphas, colors);
    std::vector<double> alpha_adj;
    std::vector<Vec3> color_adj;
    composite_backward(alphas, colors, out, adj, alpha_adj, color_adj);

    const double h = 1e-7;
    for (int i = 0; i < n; ++i) {
      std::vector<double> ap = alphas;
      ap[i] += h;
      std::vector<double> am = alphas;
      am[i] -= h;
      const double fd =
          adj.dot(composite(ap, colors).color - composite(am, colors).color) / (2 * h);
      CHECK(std::abs(alpha_adj[i] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
      CHECK((color_adj[i] - out.weights[i] * adj).norm() < 1e-9);
    }
  }
}

TEST_CASE("render_ray locates the sphere surface in expected depth") {
  const AnalyticField sphere = AnalyticField::sphere(Vec3::Zero(), 0.5);
  Ray ray;
  ray.origin = Vec3(0, 0, -2);
  ray.direction = Vec3(0, 0, 1);
  RenderConfig cfg;
  cfg.n_samples = 128;
  cfg.jitter = false;
  cfg.kappa = 400.0;
  Rng rng(0);
  const RenderOutput out = render_ray(sphere, ray, {0.5, 3.5}, cfg, rng);
  const double segment = 3.0 / 128;
  CHECK(std::abs(out.depth - 1.5) <= 2 * segment);  // first hit at t = 1.5
  CHECK(out.opacity > 0.9);
}

TEST_CASE("ray missing the sphere accumulates almost no opacity") {
  const AnalyticField sphere = AnalyticField::sphere(Vec3::Zero(), 0.5);
  Ray ray;
  ray.origin = Vec3(2, 0, -2);
  ray.direction = Vec3(0, 0, 1);
  RenderConfig cfg;
  cfg.n_samples = 64;
  cfg.jitter = false;
  cfg.kappa = 400.0;
  Rng rng(0);
  CHECK(render_ray(sphere, ray, {0.5, 3.5}, cfg, rng).opacity < 0.01);
}

TEST_CASE("render output invariants hold on 1000 random rays") {
  const AnalyticField sphere = AnalyticField::sphere(Vec3(0.1, -0.1, 0.0), 0.6);
  RenderConfig cfg;
  cfg.n_samples = 24;
  cfg.kappa = 50.0;
  Rng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    Ray ray;
    ray.origin = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    ray.direction = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    const RenderOutput out = render_ray(ray.origin.norm() > 0 ? sphere : sphere, ray,
                                        {0.1, 4.0}, cfg, rng);
    CHECK(out.opacity <= 1.0 + 1e-6);
    CHECK((out.weights.array() >= 0.0).all());
    CHECK(out.transmittance[0] == doctest::Approx(1.0));
    for (int i = 1; i < out.transmittance.size(); ++i)
      CHECK(out.transmittance[i] <= out.transmittance[i - 1] + 1e-12);
  }
}

TEST_CASE("large kappa concentrates weight mass at the intersection") {
  const AnalyticField sphere = AnalyticField::sphere(Vec3::Zero(), 0.5);
  Ray ray;
  ray.origin = Vec3(0, 0, -2);
  ray.direction = Vec3(0, 0, 1);
  RenderConfig cfg;
  cfg.n_samples = 128;
  cfg.jitter = false;
  cfg.kappa = 800.0;
  Rng rng(0);
  const RenderOutput out = render_ray(sphere, ray, {0.5, 3.5}, cfg, rng);
  const double segment = 3.0 / 128;
  const double t_hit = 1.5;
  double near_mass = 0.0;
  const RaySamples samples = [&] {
    Rng r2(0);
    return sample_stratified(0.5, 3.5, 128, r2, false);
  }();
  for (int i = 0; i + 1 < 128; ++i)
    if (std::abs(samples.t[i] - t_hit) <= 3 * segment) near_mass += out.weights[i];
  CHECK(near_mass >= 0.9 * out.opacity);
}
