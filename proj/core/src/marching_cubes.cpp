#include "rsdf/marching_cubes.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace rsdf {

namespace {

// Classic lookup tables after Paul Bourke's polygonise writeup.
#include "marching_cubes_tables.inc"

const int kCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}, {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1},
};

const int kEdgeCorners[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

}  // namespace

TriangleMesh extract_isosurface_grid(const std::vector<double>& values, const Aabb& box,
                                     int resolution, double iso_level) {
  if (resolution < 8) throw std::invalid_argument("extract_isosurface: resolution must be >= 8");
  const int n = resolution + 1;
  if (values.size() != static_cast<std::size_t>(n) * n * n)
    throw std::invalid_argument("extract_isosurface: grid size mismatch");

  const Vec3 cell = box.extent() / resolution;
  auto value_at = [&](int ix, int iy, int iz) {
    return values[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
  };
  auto node_pos = [&](int ix, int iy, int iz) {
    return Vec3(box.min.x() + ix * cell.x(), box.min.y() + iy * cell.y(),
                box.min.z() + iz * cell.z());
  };

  TriangleMesh mesh;
  // dedupe vertices by the grid edge they lie on: (node index, axis)
  std::map<std::array<int, 4>, int> edge_vertex;

  auto edge_key = [&](int ix, int iy, int iz, int corner_a, int corner_b) {
    int ax = ix + kCorner[corner_a][0], ay = iy + kCorner[corner_a][1],
        az = iz + kCorner[corner_a][2];
    int bx = ix + kCorner[corner_b][0], by = iy + kCorner[corner_b][1],
        bz = iz + kCorner[corner_b][2];
    if (std::tie(bx, by, bz) < std::tie(ax, ay, az)) {
      std::swap(ax, bx);
      std::swap(ay, by);
      std::swap(az, bz);
    }
    const int axis = (bx != ax) ? 0 : (by != ay) ? 1 : 2;
    return std::array<int, 4>{ax, ay, az, axis};
  };

  for (int ix = 0; ix < resolution; ++ix) {
    for (int iy = 0; iy < resolution; ++iy) {
      for (int iz = 0; iz < resolution; ++iz) {
        double vals[8];
        for (int c = 0; c < 8; ++c)
          vals[c] = value_at(ix + kCorner[c][0], iy + kCorner[c][1], iz + kCorner[c][2]);

        int cube_index = 0;
        for (int c = 0; c < 8; ++c)
          if (vals[c] < iso_level) cube_index |= 1 << c;
        if (kEdgeTable[cube_index] == 0) continue;

        int edge_verts[12];
        for (int e = 0; e < 12; ++e) {
          if (!(kEdgeTable[cube_index] & (1 << e))) continue;
          const auto key = edge_key(ix, iy, iz, kEdgeCorners[e][0], kEdgeCorners[e][1]);
          auto it = edge_vertex.find(key);
          if (it != edge_vertex.end()) {
            edge_verts[e] = it->second;
            continue;
          }
          const int ca = kEdgeCorners[e][0], cb = kEdgeCorners[e][1];
          const double va = vals[ca], vb = vals[cb];
          const double denom = vb - va;
          const double u = std::abs(denom) < 1e-300 ? 0.5 : (iso_level - va) / denom;
          const Vec3 pa = node_pos(ix + kCorner[ca][0], iy + kCorner[ca][1], iz + kCorner[ca][2]);
          const Vec3 pb = node_pos(ix + kCorner[cb][0], iy + kCorner[cb][1], iz + kCorner[cb][2]);
          const int idx = static_cast<int>(mesh.vertices.size());
          mesh.vertices.push_back(pa + std::clamp(u, 0.0, 1.0) * (pb - pa));
          edge_vertex.emplace(key, idx);
          edge_verts[e] = idx;
        }

        for (const int* t = kTriTable[cube_index]; *t != -1; t += 3) {
          const int a = edge_verts[t[0]], b = edge_verts[t[1]], c = edge_verts[t[2]];
          if (a == b || b == c || a == c) continue;  // collapsed sliver
          mesh.faces.push_back({a, b, c});
        }
      }
    }
  }
  return mesh;
}

TriangleMesh extract_isosurface(const ScalarFieldFn& field, const Aabb& box, int resolution,
                                double iso_level) {
  if (resolution < 8) throw std::invalid_argument("extract_isosurface: resolution must be >= 8");
  const int n = resolution + 1;
  std::vector<double> values(static_cast<std::size_t>(n) * n * n);
  const Vec3 cell = box.extent() / resolution;
  std::size_t idx = 0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        values[idx++] = field(Vec3(box.min.x() + ix * cell.x(), box.min.y() + iy * cell.y(),
                                   box.min.z() + iz * cell.z()));
  return extract_isosurface_grid(values, box, resolution, iso_level);
}

}  // namespace rsdf
