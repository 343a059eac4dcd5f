#pragma once

#include <functional>

#include "rsdf/geometry.hpp"

namespace rsdf {

using ScalarFieldFn = std::function<double(const Vec3&)>;

// Marching cubes over a regular grid of `resolution` cells per axis spanning
// the box. Vertices are placed by linear interpolation of the scalar field
// along cube edges; the mesh lives in the box's coordinate frame. A grid with
// no sign change yields an empty mesh. Throws if resolution < 8.
TriangleMesh extract_isosurface(const ScalarFieldFn& field, const Aabb& box, int resolution,
                                double iso_level = 0.0);

// Same, over precomputed samples at (resolution+1)^3 grid nodes, laid out as
// values[(ix * (res+1) + iy) * (res+1) + iz].
TriangleMesh extract_isosurface_grid(const std::vector<double>& values, const Aabb& box,
                                     int resolution, double iso_level = 0.0);

}  // namespace rsdf
