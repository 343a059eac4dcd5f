#include "rsdf/ray_strategy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace rsdf {

std::size_t RadarMask::true_count() const {
  std::size_t n = 0;
  for (auto v : data) n += v != 0;
  return n;
}

void RaySelectionConfig::validate() const {
  if (rays_per_iteration < 1)
    throw std::invalid_argument("RaySelectionConfig: rays_per_iteration must be >= 1");
  if (lambda_radar < 0.0 || lambda_radar > 1.0)
    throw std::invalid_argument("RaySelectionConfig: lambda must be in [0, 1]");
  if (dilation_radius < 0)
    throw std::invalid_argument("RaySelectionConfig: dilation radius must be >= 0");
}

RadarMask build_radar_mask(const CameraModel& camera, const PointCloud& cloud, int dilation) {
  RadarMask mask;
  mask.width = camera.image_width;
  mask.height = camera.image_height;
  mask.data.assign(static_cast<std::size_t>(mask.width) * mask.height, 0);
  for (const Vec3& p : cloud.points) {
    const auto uv = project_point(camera, p);
    if (!uv) continue;
    const int u = std::min(static_cast<int>(uv->x()), mask.width - 1);
    const int v = std::min(static_cast<int>(uv->y()), mask.height - 1);
    mask.data[static_cast<std::size_t>(v) * mask.width + u] = 1;
  }
  if (dilation > 0) {
    // separable max filter with a square element
    std::vector<std::uint8_t> tmp(mask.data.size(), 0);
    for (int v = 0; v < mask.height; ++v) {
      for (int u = 0; u < mask.width; ++u) {
        std::uint8_t m = 0;
        for (int du = -dilation; du <= dilation && !m; ++du) {
          const int uu = u + du;
          if (uu >= 0 && uu < mask.width)
            m = mask.data[static_cast<std::size_t>(v) * mask.width + uu];
        }
        tmp[static_cast<std::size_t>(v) * mask.width + u] = m;
      }
    }
    for (int v = 0; v < mask.height; ++v) {
      for (int u = 0; u < mask.width; ++u) {
        std::uint8_t m = 0;
        for (int dv = -dilation; dv <= dilation && !m; ++dv) {
          const int vv = v + dv;
          if (vv >= 0 && vv < mask.height) m = tmp[static_cast<std::size_t>(vv) * mask.width + u];
        }
        mask.data[static_cast<std::size_t>(v) * mask.width + u] = m;
      }
    }
  }
  return mask;
}

RadarMaskIndex RadarMaskIndex::build(const std::vector<RadarMask>& masks) {
  RadarMaskIndex idx;
  for (const RadarMask& m : masks) {
    idx.image_sizes.emplace_back(m.width, m.height);
    idx.total_pixels += static_cast<std::uint64_t>(m.width) * m.height;
    for (int v = 0; v < m.height; ++v)
      for (int u = 0; u < m.width; ++u)
        if (m.at(u, v)) idx.radar_pixels.push_back(PixelRef{m.image_id, u, v, true});
  }
  return idx;
}

std::vector<PixelRef> select_rays(const RadarMaskIndex& index, const RaySelectionConfig& config,
                                  Rng& rng) {
  config.validate();
  if (index.image_sizes.empty()) throw std::invalid_argument("select_rays: no training images");
  const int p = config.rays_per_iteration;
  int p_radar = static_cast<int>(std::floor(config.lambda_radar * p));
  if (p_radar > 0 && index.radar_pixels.empty()) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "select_rays: lambda > 0 but all radar masks are empty; "
                   "falling back to global sampling\n";
      warned = true;
    }
    p_radar = 0;
  }
  std::vector<PixelRef> out;
  out.reserve(p);
  for (int i = 0; i < p_radar; ++i)
    out.push_back(index.radar_pixels[rng.uniform_index(index.radar_pixels.size())]);
  for (int i = p_radar; i < p; ++i) {
    std::uint64_t flat = rng.uniform_index(index.total_pixels);
    for (std::size_t img = 0; img < index.image_sizes.size(); ++img) {
      const auto [w, h] = index.image_sizes[img];
      const std::uint64_t count = static_cast<std::uint64_t>(w) * h;
      if (flat < count) {
        out.push_back(PixelRef{static_cast<int>(img), static_cast<int>(flat % w),
                               static_cast<int>(flat / w), false});
        break;
      }
      flat -= count;
    }
  }
  return out;
}

std::vector<PixelRef> select_rays(const std::vector<RadarMask>& masks,
                                  const RaySelectionConfig& config, Rng& rng) {
  return select_rays(RadarMaskIndex::build(masks), config, rng);
}

namespace {
// linear-interpolated percentile, q in [0, 100]
double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * (static_cast<double>(values.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}
}  // namespace

SceneBounds derive_scene_bounds(const PointCloud& cloud, double horizontal_margin_fraction,
                                double vertical_margin_fraction) {
  if (cloud.size() < 10)
    throw std::invalid_argument("derive_scene_bounds: need at least 10 points");
  if (horizontal_margin_fraction < 0.0 || vertical_margin_fraction < 0.0)
    throw std::invalid_argument("derive_scene_bounds: margins must be >= 0");
  std::array<std::vector<double>, 3> coords;
  for (auto& c : coords) c.reserve(cloud.size());
  for (const Vec3& p : cloud.points)
    for (int k = 0; k < 3; ++k) coords[k].push_back(p[k]);

  SceneBounds b;
  for (int k = 0; k < 2; ++k) {
    const double lo = percentile(coords[k], 1.0);
    const double hi = percentile(coords[k], 99.0);
    const double margin = horizontal_margin_fraction * (hi - lo);
    b.horizontal.min[k] = lo - margin;
    b.horizontal.max[k] = hi + margin;
  }
  const double zlo = percentile(coords[2], 1.0);
  const double zhi = percentile(coords[2], 99.0);
  const double zmargin = vertical_margin_fraction * (zhi - zlo);
  b.z_ground = zlo - zmargin;
  b.z_top = zhi + zmargin;
  b.horizontal.min.z() = b.z_ground;
  b.horizontal.max.z() = b.z_top;
  return b;
}

std::optional<std::pair<double, double>> compute_ray_bounds(const Ray& ray,
                                                            const SceneBounds& bounds) {
  return intersect_aabb(ray, bounds.box());
}

}  // namespace rsdf
