#pragma once

#include <cstdint>
#include <vector>

#include "rsdf/geometry.hpp"
#include "rsdf/rng.hpp"

namespace rsdf {

struct RadarMask {
  int width = 0;
  int height = 0;
  int image_id = -1;
  std::vector<std::uint8_t> data;  // row-major, 0 or 1

  bool at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u] != 0; }
  std::size_t true_count() const;
};

struct RaySelectionConfig {
  int rays_per_iteration = 512;  // P
  double lambda_radar = 0.4;     // fraction drawn from the radar mask
  int dilation_radius = 2;       // pixels

  void validate() const;
};

struct SceneBounds {
  Aabb horizontal;  // x/y extents; z entries mirror z_ground/z_top
  double z_ground = 0.0;
  double z_top = 0.0;

  Aabb box() const {
    Aabb b = horizontal;
    b.min.z() = z_ground;
    b.max.z() = z_top;
    return b;
  }
};

struct PixelRef {
  int image_id = 0;
  int u = 0;
  int v = 0;
  bool from_radar_mask = false;
};

// Projects every cloud point into the image, marks hit pixels and dilates with
// a square structuring element of the given radius. Empty cloud: all-false.
RadarMask build_radar_mask(const CameraModel& camera, const PointCloud& cloud, int dilation);

/// Flattened index over a set of masks for uniform draws from the mask union
/// and from the global pixel pool.
struct RadarMaskIndex {
  std::vector<PixelRef> radar_pixels;               // union of true pixels
  std::vector<std::pair<int, int>> image_sizes;     // (width, height) per image
  std::uint64_t total_pixels = 0;

  static RadarMaskIndex build(const std::vector<RadarMask>& masks);
};

// Draws floor(lambda P) pixels uniformly from the mask union and the rest
// uniformly from all pixels of all images. If lambda > 0 but every mask is
// empty, warns once (stderr) and draws all P globally.
std::vector<PixelRef> select_rays(const RadarMaskIndex& index, const RaySelectionConfig& config,
                                  Rng& rng);
std::vector<PixelRef> select_rays(const std::vector<RadarMask>& masks,
                                  const RaySelectionConfig& config, Rng& rng);

// Horizontal extent from per-axis 1st/99th percentiles expanded by the margin
// fraction of the span; z limits likewise. Throws with fewer than 10 points.
SceneBounds derive_scene_bounds(const PointCloud& cloud, double horizontal_margin_fraction,
                                double vertical_margin_fraction);

// Clip the ray's sampling interval to the radar-derived volume. nullopt means
// the ray misses and must be skipped.
std::optional<std::pair<double, double>> compute_ray_bounds(const Ray& ray,
                                                            const SceneBounds& bounds);

}  // namespace rsdf
