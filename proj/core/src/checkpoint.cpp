#include <cstring>
#include <fstream>
#include <stdexcept>

#include "rsdf/trainer.hpp"

namespace rsdf {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'D', 'F', '0', '0', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::istream& is, T& v) {
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw std::runtime_error("load_checkpoint: truncated file");
}

void put_string(std::ostream& os, const std::string& s) {
  put(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  std::uint32_t n = 0;
  get(is, n);
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw std::runtime_error("load_checkpoint: truncated string");
  return s;
}

void put_field_config(std::ostream& os, const FieldConfig& c) {
  put(os, c.l_pos);
  put(os, c.l_dir);
  put(os, c.trunk_width);
  put(os, c.trunk_depth);
  put(os, c.color_width);
  put(os, c.color_depth);
  put(os, static_cast<std::uint8_t>(c.geometric_init));
  put(os, c.init_radius);
  put(os, c.softplus_beta);
  put(os, c.kappa_init);
  put(os, c.scene_scale);
}

FieldConfig get_field_config(std::istream& is) {
  FieldConfig c;
  std::uint8_t flag;
  get(is, c.l_pos);
  get(is, c.l_dir);
  get(is, c.trunk_width);
  get(is, c.trunk_depth);
  get(is, c.color_width);
  get(is, c.color_depth);
  get(is, flag);
  c.geometric_init = flag != 0;
  get(is, c.init_radius);
  get(is, c.softplus_beta);
  get(is, c.kappa_init);
  get(is, c.scene_scale);
  return c;
}

void put_train_config(std::ostream& os, const TrainConfig& c) {
  put(os, c.iterations);
  put(os, c.ray_batch);
  put(os, c.n_samples);
  put(os, c.learning_rate);
  put(os, c.lr_final_fraction);
  put(os, c.loss_weights.beta_surface);
  put(os, c.loss_weights.beta_eik);
  put(os, c.lambda_radar);
  put(os, c.mask_dilation);
  put(os, static_cast<std::uint8_t>(c.ray_bounding));
  put(os, c.eikonal_batch);
  put(os, c.surface_batch);
  put(os, c.warmup_iterations);
  put(os, c.seed);
  put(os, c.log_every);
  put(os, c.checkpoint_every);
  put(os, c.eval_every);
  put(os, c.bounds_margin_horizontal);
  put(os, c.bounds_margin_vertical);
  put(os, c.cube_padding);
  put(os, static_cast<std::uint8_t>(c.use_explicit_bounds));
  for (int k = 0; k < 3; ++k) put(os, c.explicit_bounds.min[k]);
  for (int k = 0; k < 3; ++k) put(os, c.explicit_bounds.max[k]);
  put(os, static_cast<std::uint8_t>(c.jitter));
}

TrainConfig get_train_config(std::istream& is) {
  TrainConfig c;
  std::uint8_t flag;
  get(is, c.iterations);
  get(is, c.ray_batch);
  get(is, c.n_samples);
  get(is, c.learning_rate);
  get(is, c.lr_final_fraction);
  get(is, c.loss_weights.beta_surface);
  get(is, c.loss_weights.beta_eik);
  get(is, c.lambda_radar);
  get(is, c.mask_dilation);
  get(is, flag);
  c.ray_bounding = flag != 0;
  get(is, c.eikonal_batch);
  get(is, c.surface_batch);
  get(is, c.warmup_iterations);
  get(is, c.seed);
  get(is, c.log_every);
  get(is, c.checkpoint_every);
  get(is, c.eval_every);
  get(is, c.bounds_margin_horizontal);
  get(is, c.bounds_margin_vertical);
  get(is, c.cube_padding);
  get(is, flag);
  c.use_explicit_bounds = flag != 0;
  for (int k = 0; k < 3; ++k) get(is, c.explicit_bounds.min[k]);
  for (int k = 0; k < 3; ++k) get(is, c.explicit_bounds.max[k]);
  get(is, flag);
  c.jitter = flag != 0;
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put_field_config(os, ckpt.field_config);
  put(os, static_cast<std::uint64_t>(ckpt.params.size()));
  os.write(reinterpret_cast<const char*>(ckpt.params.data()),
           static_cast<std::streamsize>(ckpt.params.size() * sizeof(double)));
  for (int k = 0; k < 3; ++k) put(os, ckpt.transform.center[k]);
  put(os, ckpt.transform.scale);
  for (int k = 0; k < 3; ++k) put(os, ckpt.scene_box.min[k]);
  for (int k = 0; k < 3; ++k) put(os, ckpt.scene_box.max[k]);
  put_train_config(os, ckpt.train_config);
  put(os, ckpt.iteration);
  put_string(os, ckpt.rng_state);
  if (!os) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_checkpoint: bad magic header in " + path);
  std::uint32_t version = 0;
  get(is, version);
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version in " + path);
  Checkpoint c;
  c.field_config = get_field_config(is);
  std::uint64_t n = 0;
  get(is, n);
  c.params.resize(static_cast<Eigen::Index>(n));
  if (!is.read(reinterpret_cast<char*>(c.params.data()),
               static_cast<std::streamsize>(n * sizeof(double))))
    throw std::runtime_error("load_checkpoint: truncated parameters in " + path);
  for (int k = 0; k < 3; ++k) get(is, c.transform.center[k]);
  get(is, c.transform.scale);
  for (int k = 0; k < 3; ++k) get(is, c.scene_box.min[k]);
  for (int k = 0; k < 3; ++k) get(is, c.scene_box.max[k]);
  c.train_config = get_train_config(is);
  get(is, c.iteration);
  c.rng_state = get_string(is);
  return c;
}

}  // namespace rsdf
