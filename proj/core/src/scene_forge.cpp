#include "rsdf/scene_forge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rsdf {

namespace fs = std::filesystem;

BoxSpec BoxSpec::make(double x0, double y0, double x1, double y1, double height,
                      const std::array<double, 3>& base) {
  BoxSpec b;
  b.x0 = x0;
  b.y0 = y0;
  b.x1 = x1;
  b.y1 = y1;
  b.height = height;
  // give each face a distinct tint so views carry photometric signal
  const double tint[6] = {0.85, 0.7, 0.95, 0.6, 0.4, 1.0};
  for (int f = 0; f < 6; ++f)
    for (int c = 0; c < 3; ++c) b.face_colors[f][c] = std::clamp(base[c] * tint[f], 0.0, 1.0);
  return b;
}

SceneSpec SceneSpec::default_desk(std::uint64_t seed) {
  SceneSpec s;
  s.ground_extent = 100.0;
  s.seed = seed;
  s.boxes = {
      BoxSpec::make(-32.0, -30.0, -12.0, -10.0, 24.0, {0.85, 0.45, 0.35}),
      BoxSpec::make(8.0, -28.0, 30.0, -6.0, 30.0, {0.4, 0.6, 0.85}),
      BoxSpec::make(-30.0, 6.0, -6.0, 24.0, 12.0, {0.5, 0.8, 0.45}),
      BoxSpec::make(6.0, 4.0, 32.0, 30.0, 8.0, {0.85, 0.8, 0.4}),
  };
  return s;
}

namespace {

bool rects_overlap(const BoxSpec& a, const BoxSpec& b) {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

void add_quad(TriangleMesh& mesh, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
              const std::array<double, 3>& color) {
  // two CCW triangles for quad a-b-c-d
  const int base = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(a);
  mesh.vertices.push_back(b);
  mesh.vertices.push_back(c);
  mesh.vertices.push_back(d);
  mesh.faces.push_back({base, base + 1, base + 2});
  mesh.faces.push_back({base, base + 2, base + 3});
  mesh.face_colors.push_back(color);
  mesh.face_colors.push_back(color);
}

}  // namespace

TriangleMesh build_scene(const SceneSpec& spec) {
  const double half = spec.ground_extent / 2.0;
  for (const BoxSpec& b : spec.boxes) {
    if (!(b.height > 0.0)) throw std::invalid_argument("build_scene: box height must be > 0");
    if (!(b.x0 < b.x1 && b.y0 < b.y1))
      throw std::invalid_argument("build_scene: empty box footprint");
    if (b.x0 < -half || b.x1 > half || b.y0 < -half || b.y1 > half)
      throw std::invalid_argument("build_scene: box footprint outside ground extent");
  }
  for (std::size_t i = 0; i < spec.boxes.size(); ++i)
    for (std::size_t j = i + 1; j < spec.boxes.size(); ++j)
      if (rects_overlap(spec.boxes[i], spec.boxes[j]))
        throw std::invalid_argument("build_scene: overlapping box footprints");

  TriangleMesh mesh;
  // ground plane, +z normal
  add_quad(mesh, {-half, -half, 0.0}, {half, -half, 0.0}, {half, half, 0.0}, {-half, half, 0.0},
           spec.ground_color);

  for (const BoxSpec& b : spec.boxes) {
    const double z0 = 0.0, z1 = b.height;
    // face order matches BoxSpec::face_colors: -x, +x, -y, +y, bottom, top
    add_quad(mesh, {b.x0, b.y1, z0}, {b.x0, b.y0, z0}, {b.x0, b.y0, z1}, {b.x0, b.y1, z1},
             b.face_colors[0]);
    add_quad(mesh, {b.x1, b.y0, z0}, {b.x1, b.y1, z0}, {b.x1, b.y1, z1}, {b.x1, b.y0, z1},
             b.face_colors[1]);
    add_quad(mesh, {b.x0, b.y0, z0}, {b.x1, b.y0, z0}, {b.x1, b.y0, z1}, {b.x0, b.y0, z1},
             b.face_colors[2]);
    add_quad(mesh, {b.x1, b.y1, z0}, {b.x0, b.y1, z0}, {b.x0, b.y1, z1}, {b.x1, b.y1, z1},
             b.face_colors[3]);
    add_quad(mesh, {b.x0, b.y0, z0}, {b.x0, b.y1, z0}, {b.x1, b.y1, z0}, {b.x1, b.y0, z0},
             b.face_colors[4]);
    add_quad(mesh, {b.x0, b.y0, z1}, {b.x1, b.y0, z1}, {b.x1, b.y1, z1}, {b.x0, b.y1, z1},
             b.face_colors[5]);
  }
  mesh.validate();
  return mesh;
}

std::vector<CameraModel> make_cameras(const TrajectorySpec& t, const CameraTemplate& tmpl) {
  if (t.view_count < 1) throw std::invalid_argument("make_cameras: view count must be >= 1");
  if (!(t.radius > 0.0) || !(t.altitude > 0.0))
    throw std::invalid_argument("make_cameras: radius and altitude must be > 0");
  std::vector<CameraModel> cams;
  const double fx = 0.5 * tmpl.width / std::tan(0.5 * tmpl.fov_deg * M_PI / 180.0);
  for (int i = 0; i < t.view_count; ++i) {
    double az_deg = t.azimuth_center_deg;
    if (t.view_count > 1)
      az_deg += -0.5 * t.angular_span_deg +
                t.angular_span_deg * static_cast<double>(i) / (t.view_count - 1);
    const double az = az_deg * M_PI / 180.0;
    const Vec3 pos(t.arc_center.x() + t.radius * std::cos(az),
                   t.arc_center.y() + t.radius * std::sin(az), t.altitude);
    const Vec3 forward = (t.look_at - pos).normalized();
    Vec3 right = forward.cross(Vec3::UnitZ());
    if (right.norm() < 1e-9) right = Vec3::UnitX();  // straight-down view
    right.normalize();
    const Vec3 down = forward.cross(right).normalized();

    CameraModel cam;
    cam.image_width = tmpl.width;
    cam.image_height = tmpl.height;
    cam.focal_x = fx;
    cam.focal_y = fx;
    cam.principal_x = tmpl.width / 2.0;
    cam.principal_y = tmpl.height / 2.0;
    cam.rotation.col(0) = right;
    cam.rotation.col(1) = down;
    cam.rotation.col(2) = forward;
    cam.translation = pos;
    cam.validate();
    cams.push_back(cam);
  }
  return cams;
}

namespace {
const Vec3 kSunDirection = Vec3(-0.4, 0.25, 0.88).normalized();
}

std::vector<Image> render_views(const TriangleMesh& mesh,
                                const std::vector<CameraModel>& cameras) {
  std::vector<Image> images;
  images.reserve(cameras.size());
  for (const CameraModel& cam : cameras) {
    Image img = Image::create(cam.image_width, cam.image_height, 3);
    for (int v = 0; v < cam.image_height; ++v) {
      for (int u = 0; u < cam.image_width; ++u) {
        const Ray ray = generate_ray(cam, u + 0.5, v + 0.5);
        const auto hit = intersect_mesh(ray, mesh);
        if (!hit) continue;  // black background
        const Vec3 n = mesh.face_normal(hit->face);
        const double shade = 0.3 + 0.7 * std::max(0.0, n.dot(kSunDirection));
        const auto& fc = mesh.face_colors.empty() ? std::array<double, 3>{0.5, 0.5, 0.5}
                                                  : mesh.face_colors[hit->face];
        for (int c = 0; c < 3; ++c)
          img.at(u, v, c) = static_cast<std::uint8_t>(
              std::lround(std::clamp(fc[c] * shade, 0.0, 1.0) * 255.0));
      }
    }
    images.push_back(std::move(img));
  }
  return images;
}

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

struct EdgeKey {
  int a, b;
  bool operator<(const EdgeKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

// crease edges per face, keyed by vertex positions so duplicated vertices
// from the per-quad mesh construction still pair up
std::vector<std::vector<std::pair<Vec3, Vec3>>> crease_edges_per_face(const TriangleMesh& mesh) {
  auto quantize = [](const Vec3& p) {
    return std::array<long long, 3>{static_cast<long long>(std::llround(p.x() * 1e6)),
                                    static_cast<long long>(std::llround(p.y() * 1e6)),
                                    static_cast<long long>(std::llround(p.z() * 1e6))};
  };
  std::map<std::pair<std::array<long long, 3>, std::array<long long, 3>>,
           std::vector<int>>
      edge_faces;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    for (int e = 0; e < 3; ++e) {
      auto qa = quantize(mesh.vertices[tri[e]]);
      auto qb = quantize(mesh.vertices[tri[(e + 1) % 3]]);
      if (qb < qa) std::swap(qa, qb);
      edge_faces[{qa, qb}].push_back(static_cast<int>(f));
    }
  }
  std::vector<std::vector<std::pair<Vec3, Vec3>>> creases(mesh.faces.size());
  const double cos_threshold = std::cos(30.0 * M_PI / 180.0);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3 nf = mesh.face_normal(f);
    for (int e = 0; e < 3; ++e) {
      const Vec3& va = mesh.vertices[tri[e]];
      const Vec3& vb = mesh.vertices[tri[(e + 1) % 3]];
      auto qa = quantize(va);
      auto qb = quantize(vb);
      if (qb < qa) std::swap(qa, qb);
      const auto& faces = edge_faces[{qa, qb}];
      bool crease = faces.size() == 1;  // boundary
      for (int other : faces) {
        if (other == static_cast<int>(f)) continue;
        if (nf.dot(mesh.face_normal(other)) < cos_threshold) crease = true;
      }
      if (crease) creases[f].emplace_back(va, vb);
    }
  }
  return creases;
}

bool visible_from_any(const Vec3& p, const Vec3& n, const TriangleMesh& mesh,
                      const std::vector<CameraModel>& cameras) {
  for (const CameraModel& cam : cameras) {
    const Vec3 to_cam = cam.translation - p;
    if (n.dot(to_cam) <= 0.0) continue;  // back-facing for this viewpoint
    const double dist = to_cam.norm();
    Ray ray;
    ray.origin = p + 1e-4 * n;
    ray.direction = to_cam / dist;
    if (!intersect_mesh(ray, mesh, 1e-6, dist - 1e-3)) return true;
  }
  return false;
}

}  // namespace

PointCloud sample_radar_points(const TriangleMesh& mesh, const std::vector<CameraModel>& cameras,
                               const RadarSimSpec& spec) {
  if (!(spec.density > 0.0)) throw std::invalid_argument("sample_radar_points: density <= 0");
  if (!(spec.emphasis >= 1.0)) throw std::invalid_argument("sample_radar_points: emphasis < 1");
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("sample_radar_points: negative sigma");

  Rng rng(spec.seed);
  const auto creases = crease_edges_per_face(mesh);
  PointCloud cloud;

  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const Vec3 n = mesh.face_normal(f);
    const bool facade = std::abs(n.z()) < spec.facade_threshold;

    // candidates at the emphasized density, then thinned outside the
    // emphasized regions so effective densities come out right
    const double expected = mesh.face_area(f) * spec.density * spec.emphasis;
    int count = static_cast<int>(std::floor(expected));
    if (rng.uniform() < expected - count) ++count;
    for (int i = 0; i < count; ++i) {
      double u = rng.uniform(), v = rng.uniform();
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      const Vec3 p = a + u * (b - a) + v * (c - a);
      bool emphasized = facade;
      if (!emphasized) {
        for (const auto& [ea, eb] : creases[f]) {
          if (point_segment_distance(p, ea, eb) < spec.edge_band) {
            emphasized = true;
            break;
          }
        }
      }
      if (!emphasized && rng.uniform() >= 1.0 / spec.emphasis) continue;
      if (spec.sensor_visibility && !visible_from_any(p, n, mesh, cameras)) continue;
      cloud.points.push_back(p);
    }
  }

  if (spec.noise_sigma > 0.0) {
    for (Vec3& p : cloud.points)
      for (int k = 0; k < 3; ++k) p[k] += rng.normal(0.0, spec.noise_sigma);
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// bundle I/O

namespace {

std::string image_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%04d.png", i);
  return buf;
}

void write_double(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void save_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_xyz: cannot open " + path);
  const bool has_intensity = !cloud.intensity.empty();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    write_double(os, p.x());
    os << ' ';
    write_double(os, p.y());
    os << ' ';
    write_double(os, p.z());
    if (has_intensity) {
      os << ' ';
      write_double(os, cloud.intensity[i]);
    }
    os << '\n';
  }
}

PointCloud load_xyz(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_xyz: cannot open " + path);
  PointCloud cloud;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      throw std::runtime_error("load_xyz: malformed line in " + path);
    double intensity;
    if (ls >> intensity) cloud.intensity.push_back(intensity);
    cloud.points.push_back(p);
  }
  if (!cloud.intensity.empty() && cloud.intensity.size() != cloud.points.size())
    throw std::runtime_error("load_xyz: inconsistent intensity column in " + path);
  cloud.validate();
  return cloud;
}

void save_ply(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_ply: cannot open " + path);
  const bool colors = !mesh.face_colors.empty();
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << mesh.vertices.size() << "\n";
  os << "property double x\nproperty double y\nproperty double z\n";
  os << "element face " << mesh.faces.size() << "\n";
  os << "property list uchar int vertex_indices\n";
  if (colors) os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  os << "end_header\n";
  for (const Vec3& v : mesh.vertices) {
    write_double(os, v.x());
    os << ' ';
    write_double(os, v.y());
    os << ' ';
    write_double(os, v.z());
    os << '\n';
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    os << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2];
    if (colors) {
      for (int c = 0; c < 3; ++c)
        os << ' ' << static_cast<int>(std::lround(std::clamp(mesh.face_colors[f][c], 0.0, 1.0) * 255.0));
    }
    os << '\n';
  }
}

TriangleMesh load_ply(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_ply: cannot open " + path);
  std::string line;
  std::size_t n_vertices = 0, n_faces = 0;
  bool face_colors = false;
  bool in_face_element = false;
  if (!std::getline(is, line) || line.substr(0, 3) != "ply")
    throw std::runtime_error("load_ply: not a PLY file: " + path);
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "element") {
      std::string what;
      std::size_t count;
      ls >> what >> count;
      if (what == "vertex") {
        n_vertices = count;
        in_face_element = false;
      } else if (what == "face") {
        n_faces = count;
        in_face_element = true;
      }
    } else if (tok == "property" && in_face_element) {
      if (line.find("red") != std::string::npos) face_colors = true;
    } else if (tok == "end_header") {
      break;
    }
  }
  TriangleMesh mesh;
  mesh.vertices.resize(n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("load_ply: truncated vertices in " + path);
    std::istringstream ls(line);
    if (!(ls >> mesh.vertices[i].x() >> mesh.vertices[i].y() >> mesh.vertices[i].z()))
      throw std::runtime_error("load_ply: malformed vertex in " + path);
  }
  for (std::size_t f = 0; f < n_faces; ++f) {
    if (!std::getline(is, line)) throw std::runtime_error("load_ply: truncated faces in " + path);
    std::istringstream ls(line);
    int k;
    std::array<int, 3> tri;
    if (!(ls >> k >> tri[0] >> tri[1] >> tri[2]) || k != 3)
      throw std::runtime_error("load_ply: non-triangular face in " + path);
    mesh.faces.push_back(tri);
    if (face_colors) {
      int r, g, b;
      if (!(ls >> r >> g >> b)) throw std::runtime_error("load_ply: missing face color in " + path);
      mesh.face_colors.push_back({r / 255.0, g / 255.0, b / 255.0});
    }
  }
  mesh.validate();
  return mesh;
}

void save_bundle(const DatasetBundle& bundle, const std::string& directory) {
  if (bundle.images.size() != bundle.cameras.size())
    throw std::invalid_argument("save_bundle: one camera per image required");
  fs::create_directories(fs::path(directory) / "images");
  for (std::size_t i = 0; i < bundle.images.size(); ++i)
    write_png((fs::path(directory) / "images" / image_name(static_cast<int>(i))).string(),
              bundle.images[i]);

  std::ofstream cams((fs::path(directory) / "cameras.txt").string());
  cams << "# rsdf cameras v1\n";
  cams << "count " << bundle.cameras.size() << "\n";
  for (std::size_t i = 0; i < bundle.cameras.size(); ++i) {
    const CameraModel& c = bundle.cameras[i];
    cams << "camera " << i << "\n";
    cams << "image images/" << image_name(static_cast<int>(i)) << "\n";
    cams << "size " << c.image_width << ' ' << c.image_height << "\n";
    cams << "intrinsics ";
    write_double(cams, c.focal_x);
    cams << ' ';
    write_double(cams, c.focal_y);
    cams << ' ';
    write_double(cams, c.principal_x);
    cams << ' ';
    write_double(cams, c.principal_y);
    cams << "\n";
    cams << "rotation";
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) {
        cams << ' ';
        write_double(cams, c.rotation(r, col));
      }
    cams << "\ntranslation";
    for (int k = 0; k < 3; ++k) {
      cams << ' ';
      write_double(cams, c.translation[k]);
    }
    cams << "\n";
  }
  cams.close();

  save_xyz(bundle.cloud, (fs::path(directory) / "radar.xyz").string());
  save_ply(bundle.gt_mesh, (fs::path(directory) / "gt_mesh.ply").string());

  std::ofstream meta((fs::path(directory) / "meta.txt").string());
  for (const auto& [k, v] : bundle.meta) meta << k << " = " << v << "\n";
}

DatasetBundle load_bundle(const std::string& directory) {
  DatasetBundle bundle;
  const fs::path dir(directory);
  const fs::path cam_path = dir / "cameras.txt";
  if (!fs::exists(cam_path)) throw std::runtime_error("load_bundle: missing " + cam_path.string());

  std::ifstream cams(cam_path.string());
  std::string line;
  std::size_t count = 0;
  std::vector<std::string> image_files;
  while (std::getline(cams, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "count") {
      ls >> count;
    } else if (tok == "camera") {
      CameraModel c;
      std::string img_file;
      for (int field = 0; field < 5; ++field) {
        if (!std::getline(cams, line))
          throw std::runtime_error("load_bundle: truncated camera block in " + cam_path.string());
        std::istringstream fs2(line);
        std::string key;
        fs2 >> key;
        if (key == "image") {
          fs2 >> img_file;
        } else if (key == "size") {
          fs2 >> c.image_width >> c.image_height;
        } else if (key == "intrinsics") {
          fs2 >> c.focal_x >> c.focal_y >> c.principal_x >> c.principal_y;
        } else if (key == "rotation") {
          for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 3; ++col) fs2 >> c.rotation(r, col);
        } else if (key == "translation") {
          for (int k = 0; k < 3; ++k) fs2 >> c.translation[k];
        } else {
          throw std::runtime_error("load_bundle: unexpected camera field '" + key + "'");
        }
      }
      c.validate();
      bundle.cameras.push_back(c);
      image_files.push_back(img_file);
    }
  }
  if (bundle.cameras.size() != count)
    throw std::runtime_error("load_bundle: camera count mismatch in " + cam_path.string());

  for (const std::string& rel : image_files) {
    const fs::path p = dir / rel;
    if (!fs::exists(p)) throw std::runtime_error("load_bundle: missing " + p.string());
    bundle.images.push_back(read_png(p.string()));
  }

  const fs::path xyz = dir / "radar.xyz";
  if (!fs::exists(xyz)) throw std::runtime_error("load_bundle: missing " + xyz.string());
  bundle.cloud = load_xyz(xyz.string());

  const fs::path ply = dir / "gt_mesh.ply";
  if (!fs::exists(ply)) throw std::runtime_error("load_bundle: missing " + ply.string());
  bundle.gt_mesh = load_ply(ply.string());

  const fs::path meta = dir / "meta.txt";
  if (fs::exists(meta)) {
    std::ifstream ms(meta.string());
    while (std::getline(ms, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      bundle.meta[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }
  return bundle;
}

}  // namespace rsdf
