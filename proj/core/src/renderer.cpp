#include "rsdf/renderer.hpp"

#include <cmath>
#include <stdexcept>

namespace rsdf {

namespace {
constexpr double kPhiFloor = 1e-7;

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
}  // namespace

RaySamples sample_stratified(double t_near, double t_far, int n, Rng& rng, bool jitter) {
  if (!(t_near < t_far)) throw std::invalid_argument("sample_stratified: inverted bounds");
  if (n < 2) throw std::invalid_argument("sample_stratified: need at least 2 samples");
  RaySamples s;
  s.t.resize(n);
  const double bin = (t_far - t_near) / n;
  for (int i = 0; i < n; ++i) {
    const double u = jitter ? rng.uniform() : 0.5;
    s.t[i] = t_near + (i + u) * bin;
  }
  s.delta.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) s.delta[i] = s.t[i + 1] - s.t[i];
  return s;
}

double sdf_to_opacity(double s_i, double s_next, double kappa) {
  OpacityGrad unused;
  return sdf_to_opacity_grad(s_i, s_next, kappa, unused);
}

double sdf_to_opacity_grad(double s_i, double s_next, double kappa, OpacityGrad& grad) {
  if (!(kappa > 0.0)) throw std::invalid_argument("sdf_to_opacity: kappa must be > 0");
  grad = OpacityGrad{};
  const double phi_i_raw = logistic(kappa * s_i);
  const double phi_n = logistic(kappa * s_next);
  const bool clamped = phi_i_raw < kPhiFloor;
  const double phi_i = clamped ? kPhiFloor : phi_i_raw;
  const double raw = (phi_i - phi_n) / phi_i;
  if (raw <= 0.0) return 0.0;
  const double alpha = std::min(raw, 1.0);
  // alpha = 1 - phi_n / phi_i
  const double dphi_n_ds = kappa * phi_n * (1.0 - phi_n);
  const double dphi_n_dk = s_next * phi_n * (1.0 - phi_n);
  grad.d_s_next = -dphi_n_ds / phi_i;
  grad.d_kappa = -dphi_n_dk / phi_i;
  if (!clamped) {
    const double dphi_i_ds = kappa * phi_i * (1.0 - phi_i);
    const double dphi_i_dk = s_i * phi_i * (1.0 - phi_i);
    grad.d_s += phi_n / (phi_i * phi_i) * dphi_i_ds;
    grad.d_kappa += phi_n / (phi_i * phi_i) * dphi_i_dk;
  }
  return alpha;
}

RenderOutput composite(const std::vector<double>& alphas, const std::vector<Vec3>& colors) {
  if (alphas.size() != colors.size())
    throw std::invalid_argument("composite: alpha/color size mismatch");
  const int n = static_cast<int>(alphas.size());
  RenderOutput out;
  out.weights.setZero(n);
  out.transmittance.setZero(n);
  double trans = 1.0;
  for (int i = 0; i < n; ++i) {
    const double a = alphas[i];
    if (!(a >= 0.0) || !(a <= 1.0))
      throw std::invalid_argument("composite: alpha outside [0, 1]");
    out.transmittance[i] = trans;
    const double w = trans * a;
    out.weights[i] = w;
    out.color += w * colors[i];
    out.opacity += w;
    trans *= 1.0 - a;
  }
  return out;
}

void composite_backward(const std::vector<double>& alphas, const std::vector<Vec3>& colors,
                        const RenderOutput& out, const Vec3& color_adj,
                        std::vector<double>& alpha_adj, std::vector<Vec3>& color_adj_out) {
  const int n = static_cast<int>(alphas.size());
  alpha_adj.assign(n, 0.0);
  color_adj_out.assign(n, Vec3::Zero());
  // g_i = dL/dw_i; dL/dalpha_i = T_i g_i - (sum_{j>i} g_j w_j) / (1 - alpha_i)
  double suffix = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double g = color_adj.dot(colors[i]);
    const double one_minus = 1.0 - alphas[i];
    double adj = out.transmittance[i] * g;
    if (one_minus > 1e-12) adj -= suffix / one_minus;
    alpha_adj[i] = adj;
    color_adj_out[i] = color_adj * out.weights[i];
    suffix += g * out.weights[i];
  }
}

RenderOutput render_ray(const SdfColorField& field, const Ray& ray,
                        std::pair<double, double> bounds, const RenderConfig& config, Rng& rng) {
  const RaySamples samples =
      sample_stratified(bounds.first, bounds.second, config.n_samples, rng, config.jitter);
  const int n = static_cast<int>(samples.t.size());
  std::vector<double> sdf(n);
  std::vector<Vec3> color(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 x = ray.origin + samples.t[i] * ray.direction;
    const FieldSample fs = field.query(x, ray.direction);
    sdf[i] = fs.sdf;
    color[i] = fs.color;
  }
  std::vector<double> alphas(n - 1);
  std::vector<Vec3> seg_colors(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    alphas[i] = sdf_to_opacity(sdf[i], sdf[i + 1], config.kappa);
    seg_colors[i] = color[i];
  }
  RenderOutput out = composite(alphas, seg_colors);
  out.depth = 0.0;
  for (int i = 0; i + 1 < n; ++i) out.depth += out.weights[i] * samples.t[i];
  return out;
}

}  // namespace rsdf
