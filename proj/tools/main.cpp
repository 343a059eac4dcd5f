// rsdf command-line driver: forge | train | mesh | eval | ablate.
//
// All commands read one flat key=value config file with per-command dotted
// prefixes (train.iterations, forge.view_count, ...). Unknown keys are hard
// errors so a typo in a sweep config cannot silently fall back to a default.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsdf/config.hpp"
#include "rsdf/evalkit.hpp"
#include "rsdf/plot.hpp"
#include "rsdf/scene_forge.hpp"
#include "rsdf/trainer.hpp"

namespace fs = std::filesystem;
using namespace rsdf;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool no_radar = false;
  std::optional<double> lambda;
  std::optional<int> iters;
  std::optional<int> grid;
};

Config load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return Config::parse("");
  return Config::load(args.config_path);
}

const std::set<std::string> kKnownKeys = {
    // forge
    "forge.seed", "forge.ground_extent", "forge.view_count", "forge.radius", "forge.altitude",
    "forge.azimuth_center_deg", "forge.angular_span_deg", "forge.image_size", "forge.fov_deg",
    "forge.density", "forge.emphasis", "forge.facade_threshold", "forge.edge_band",
    "forge.noise_sigma", "forge.sensor_visibility",
    // train (shared by ablate variants)
    "train.bundle", "train.iterations", "train.ray_batch", "train.n_samples",
    "train.learning_rate", "train.lr_final_fraction", "train.beta_surface", "train.beta_eik",
    "train.lambda", "train.mask_dilation", "train.ray_bounding", "train.eikonal_batch",
    "train.surface_batch", "train.warmup_iterations", "train.seed", "train.log_every",
    "train.eval_every", "train.cube_padding", "train.jitter", "train.l_pos", "train.l_dir",
    "train.trunk_width", "train.trunk_depth", "train.color_width", "train.color_depth",
    "train.kappa_init",
    // mesh
    "mesh.checkpoint", "mesh.grid",
    // eval
    "eval.checkpoint", "eval.bundle", "eval.grid", "eval.samples", "eval.tau_cm", "eval.seed",
    // ablate
    "ablate.eval_every", "ablate.eval_grid", "ablate.eval_samples", "ablate.tau_cm",
};

TrainConfig train_config_from(const Config& cfg, const CommonArgs& args) {
  TrainConfig tc;
  tc.iterations = cfg.get_int("train.iterations", tc.iterations);
  tc.ray_batch = cfg.get_int("train.ray_batch", tc.ray_batch);
  tc.n_samples = cfg.get_int("train.n_samples", tc.n_samples);
  tc.learning_rate = cfg.get_double("train.learning_rate", tc.learning_rate);
  tc.lr_final_fraction = cfg.get_double("train.lr_final_fraction", tc.lr_final_fraction);
  tc.loss_weights.beta_surface =
      cfg.get_double("train.beta_surface", tc.loss_weights.beta_surface);
  tc.loss_weights.beta_eik = cfg.get_double("train.beta_eik", tc.loss_weights.beta_eik);
  tc.lambda_radar = cfg.get_double("train.lambda", tc.lambda_radar);
  tc.mask_dilation = cfg.get_int("train.mask_dilation", tc.mask_dilation);
  tc.ray_bounding = cfg.get_bool("train.ray_bounding", tc.ray_bounding);
  tc.eikonal_batch = cfg.get_int("train.eikonal_batch", tc.eikonal_batch);
  tc.surface_batch = cfg.get_int("train.surface_batch", tc.surface_batch);
  tc.warmup_iterations = cfg.get_int("train.warmup_iterations", tc.warmup_iterations);
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 0));
  tc.log_every = cfg.get_int("train.log_every", tc.log_every);
  tc.eval_every = cfg.get_int("train.eval_every", tc.eval_every);
  tc.cube_padding = cfg.get_double("train.cube_padding", tc.cube_padding);
  tc.jitter = cfg.get_bool("train.jitter", tc.jitter);
  tc.field.l_pos = cfg.get_int("train.l_pos", tc.field.l_pos);
  tc.field.l_dir = cfg.get_int("train.l_dir", tc.field.l_dir);
  tc.field.trunk_width = cfg.get_int("train.trunk_width", tc.field.trunk_width);
  tc.field.trunk_depth = cfg.get_int("train.trunk_depth", tc.field.trunk_depth);
  tc.field.color_width = cfg.get_int("train.color_width", tc.field.color_width);
  tc.field.color_depth = cfg.get_int("train.color_depth", tc.field.color_depth);
  tc.field.kappa_init = cfg.get_double("train.kappa_init", tc.field.kappa_init);

  if (args.seed) tc.seed = *args.seed;
  if (args.iters) tc.iterations = *args.iters;
  if (args.lambda) tc.lambda_radar = *args.lambda;
  if (args.no_radar) {
    // image-only baseline: no surface supervision, no radar-guided selection,
    // no radar-derived interval
    tc.loss_weights.beta_surface = 0.0;
    tc.lambda_radar = 0.0;
    tc.ray_bounding = false;
  }
  return tc;
}

int cmd_forge(const CommonArgs& args) {
  const Config cfg = load_config(args);
  cfg.require_known(kKnownKeys);

  std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("forge.seed", 0));
  if (args.seed) seed = *args.seed;

  SceneSpec scene = SceneSpec::default_desk(seed);
  scene.ground_extent = cfg.get_double("forge.ground_extent", scene.ground_extent);

  TrajectorySpec traj;
  traj.view_count = cfg.get_int("forge.view_count", traj.view_count);
  traj.radius = cfg.get_double("forge.radius", traj.radius);
  traj.altitude = cfg.get_double("forge.altitude", traj.altitude);
  traj.azimuth_center_deg = cfg.get_double("forge.azimuth_center_deg", traj.azimuth_center_deg);
  traj.angular_span_deg = cfg.get_double("forge.angular_span_deg", traj.angular_span_deg);

  CameraTemplate tmpl;
  tmpl.width = tmpl.height = cfg.get_int("forge.image_size", tmpl.width);
  tmpl.fov_deg = cfg.get_double("forge.fov_deg", tmpl.fov_deg);

  RadarSimSpec radar;
  radar.density = cfg.get_double("forge.density", radar.density);
  radar.emphasis = cfg.get_double("forge.emphasis", radar.emphasis);
  radar.facade_threshold = cfg.get_double("forge.facade_threshold", radar.facade_threshold);
  radar.edge_band = cfg.get_double("forge.edge_band", radar.edge_band);
  radar.noise_sigma = cfg.get_double("forge.noise_sigma", radar.noise_sigma);
  radar.sensor_visibility = cfg.get_bool("forge.sensor_visibility", radar.sensor_visibility);
  radar.seed = seed;

  DatasetBundle bundle;
  bundle.gt_mesh = build_scene(scene);
  bundle.cameras = make_cameras(traj, tmpl);
  bundle.images = render_views(bundle.gt_mesh, bundle.cameras);
  bundle.cloud = sample_radar_points(bundle.gt_mesh, bundle.cameras, radar);
  bundle.meta["seed"] = std::to_string(seed);

  save_bundle(bundle, args.out_dir);

  const Aabb extent = bundle.gt_mesh.bounds();
  std::cout << "bundle: " << args.out_dir << "\n"
            << "views: " << bundle.images.size() << "\n"
            << "radar points: " << bundle.cloud.size() << "\n"
            << "scene extent: " << extent.extent().transpose() << " m\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& bundle_arg) {
  const Config cfg = load_config(args);
  cfg.require_known(kKnownKeys);

  const std::string bundle_dir =
      bundle_arg.empty() ? cfg.get_string("train.bundle", "") : bundle_arg;
  if (bundle_dir.empty()) throw std::runtime_error("train: no bundle directory given");

  const DatasetBundle bundle = load_bundle(bundle_dir);
  const TrainConfig tc = train_config_from(cfg, args);

  fs::create_directories(args.out_dir);
  Trainer trainer(bundle, tc);
  const std::vector<IterationLog> logs = trainer.run();

  const std::string ckpt_path = args.out_dir + "/checkpoint.bin";
  save_checkpoint(trainer.checkpoint(), ckpt_path);
  write_log_csv(logs, args.out_dir + "/log.csv");

  std::cout << "checkpoint: " << ckpt_path << "\n"
            << "iterations: " << trainer.iteration() << "\n"
            << "final loss: " << (logs.empty() ? 0.0 : logs.back().loss.total) << "\n";
  return 0;
}

int cmd_mesh(const CommonArgs& args, const std::string& ckpt_arg) {
  const Config cfg = load_config(args);
  cfg.require_known(kKnownKeys);

  const std::string ckpt_path =
      ckpt_arg.empty() ? cfg.get_string("mesh.checkpoint", "") : ckpt_arg;
  if (ckpt_path.empty()) throw std::runtime_error("mesh: no checkpoint given");
  int resolution = cfg.get_int("mesh.grid", 256);
  if (args.grid) resolution = *args.grid;

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const MlpField field = field_from_checkpoint(ckpt);
  const TriangleMesh mesh = extract_mesh(field, ckpt.transform, ckpt.mesh_box(), resolution);

  fs::create_directories(args.out_dir);
  const std::string out_path = args.out_dir + "/mesh.ply";
  save_ply(mesh, out_path);
  std::cout << "mesh: " << out_path << "\n"
            << "vertices: " << mesh.vertices.size() << "\n"
            << "faces: " << mesh.faces.size() << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_arg, const std::string& bundle_arg) {
  const Config cfg = load_config(args);
  cfg.require_known(kKnownKeys);

  const std::string ckpt_path =
      ckpt_arg.empty() ? cfg.get_string("eval.checkpoint", "") : ckpt_arg;
  const std::string bundle_dir =
      bundle_arg.empty() ? cfg.get_string("eval.bundle", "") : bundle_arg;
  if (ckpt_path.empty()) throw std::runtime_error("eval: no checkpoint given");
  if (bundle_dir.empty()) throw std::runtime_error("eval: no bundle directory given");

  EvalOptions options;
  options.grid_resolution = cfg.get_int("eval.grid", options.grid_resolution);
  options.mesh_samples = cfg.get_int("eval.samples", options.mesh_samples);
  options.tau_cm = cfg.get_double("eval.tau_cm", options.tau_cm);
  options.sample_seed = static_cast<std::uint64_t>(cfg.get_int("eval.seed", 7));
  if (args.grid) options.grid_resolution = *args.grid;

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const DatasetBundle bundle = load_bundle(bundle_dir);
  const MetricReport report = evaluate(ckpt, bundle, options);

  fs::create_directories(args.out_dir);
  write_metric_csv(report, args.out_dir + "/metrics.csv");

  std::printf("cd_l1: %.3f cm\nprecision: %.2f %%\nrecall: %.2f %%\nfscore: %.2f %%\n",
              report.cd_l1_cm, report.precision, report.recall, report.fscore);
  if (report.empty_mesh) std::cout << "warning: extracted mesh was empty\n";
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& bundle_arg) {
  const Config cfg = load_config(args);
  cfg.require_known(kKnownKeys);

  const std::string bundle_dir =
      bundle_arg.empty() ? cfg.get_string("train.bundle", "") : bundle_arg;
  if (bundle_dir.empty()) throw std::runtime_error("ablate: no bundle directory given");
  const DatasetBundle bundle = load_bundle(bundle_dir);

  TrainConfig base = train_config_from(cfg, args);
  EvalOptions eval_options;
  eval_options.grid_resolution = cfg.get_int("ablate.eval_grid", 96);
  eval_options.mesh_samples = cfg.get_int("ablate.eval_samples", 20000);
  eval_options.tau_cm = cfg.get_double("ablate.tau_cm", 100.0);
  if (args.grid) eval_options.grid_resolution = *args.grid;
  base.eval_every = cfg.get_int("ablate.eval_every", std::max(1, base.iterations / 10));

  struct Variant {
    std::string name;
    bool ray_selection;
    bool ray_bounding;
  };
  const Variant variants[] = {
      {"full", true, true},
      {"no_rs", false, true},
      {"no_bd", true, false},
      {"no_both", false, false},
  };

  fs::create_directories(args.out_dir);
  std::ofstream reports(args.out_dir + "/reports.csv");
  reports << "variant,cd_l1_cm,precision,recall,fscore,tau_cm\n";
  std::ofstream curve_csv(args.out_dir + "/fscore_curve.csv");
  curve_csv << "variant,iteration,fscore\n";

  PlotSpec fscore_plot;
  fscore_plot.title = "F-score vs iteration";
  fscore_plot.x_label = "iteration";
  fscore_plot.y_label = "F (%)";
  PlotSpec loss_plot;
  loss_plot.title = "Total loss vs iteration";
  loss_plot.x_label = "iteration";
  loss_plot.y_label = "loss";

  for (const Variant& variant : variants) {
    TrainConfig tc = base;
    if (!variant.ray_selection) tc.lambda_radar = 0.0;
    tc.ray_bounding = variant.ray_bounding;

    std::cout << "[" << variant.name << "] training " << tc.iterations << " iterations\n";
    Trainer trainer(bundle, tc);

    PlotSeries curve;
    curve.label = variant.name;
    const auto hook = [&](int iteration, const Trainer& t) {
      const MetricReport r = evaluate(t.checkpoint(), bundle, eval_options);
      curve.x.push_back(iteration);
      curve.y.push_back(r.fscore);
      curve_csv << variant.name << ',' << iteration << ',' << r.fscore << "\n";
      std::cout << "  iter " << iteration << " F " << r.fscore << "\n";
    };
    const std::vector<IterationLog> logs = trainer.run(hook);

    const std::string prefix = args.out_dir + "/" + variant.name;
    save_checkpoint(trainer.checkpoint(), prefix + "_checkpoint.bin");
    write_log_csv(logs, prefix + "_log.csv");

    const MetricReport final_report = evaluate(trainer.checkpoint(), bundle, eval_options);
    if (curve.x.empty() || curve.x.back() != tc.iterations) {
      curve.x.push_back(tc.iterations);
      curve.y.push_back(final_report.fscore);
      curve_csv << variant.name << ',' << tc.iterations << ',' << final_report.fscore << "\n";
    }
    reports << variant.name << ',' << final_report.cd_l1_cm << ',' << final_report.precision
            << ',' << final_report.recall << ',' << final_report.fscore << ','
            << final_report.tau_cm << "\n";

    if (curve.x.size() >= 2) fscore_plot.series.push_back(curve);
    PlotSeries loss_curve;
    loss_curve.label = variant.name;
    for (const IterationLog& log : logs) {
      loss_curve.x.push_back(log.iteration);
      loss_curve.y.push_back(log.loss.total);
    }
    if (loss_curve.x.size() >= 2) loss_plot.series.push_back(loss_curve);
  }
  reports.close();

  if (!fscore_plot.series.empty()) {
    write_plot_png(fscore_plot, args.out_dir + "/fscore_curve.png");
    write_plot_svg(fscore_plot, args.out_dir + "/fscore_curve.svg");
  }
  if (!loss_plot.series.empty()) {
    write_plot_png(loss_plot, args.out_dir + "/loss_curve.png");
    write_plot_svg(loss_plot, args.out_dir + "/loss_curve.svg");
  }

  std::cout << "reports: " << args.out_dir << "/reports.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radar-fused neural surface reconstruction"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string bundle_arg, ckpt_arg;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "flat key=value config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--lambda", args.lambda, "radar ray fraction override");
    cmd->add_option("--iters", args.iters, "iteration count override");
    cmd->add_option("--grid", args.grid, "marching-cubes resolution override");
    cmd->add_flag("--no-radar", args.no_radar,
                  "image-only baseline: no surface loss, selection, or bounding");
  };

  CLI::App* forge = app.add_subcommand("forge", "generate a synthetic dataset bundle");
  add_common(forge);

  CLI::App* train = app.add_subcommand("train", "fit the field to a bundle");
  add_common(train);
  train->add_option("bundle", bundle_arg, "dataset bundle directory");

  CLI::App* mesh = app.add_subcommand("mesh", "extract a mesh from a checkpoint");
  add_common(mesh);
  mesh->add_option("checkpoint", ckpt_arg, "checkpoint file");

  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint against ground truth");
  add_common(eval);
  eval->add_option("checkpoint", ckpt_arg, "checkpoint file");
  eval->add_option("bundle", bundle_arg, "dataset bundle directory");

  CLI::App* ablate = app.add_subcommand("ablate", "train and score the four strategy variants");
  add_common(ablate);
  ablate->add_option("bundle", bundle_arg, "dataset bundle directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (forge->parsed()) return cmd_forge(args);
    if (train->parsed()) return cmd_train(args, bundle_arg);
    if (mesh->parsed()) return cmd_mesh(args, ckpt_arg);
    if (eval->parsed()) return cmd_eval(args, ckpt_arg, bundle_arg);
    if (ablate->parsed()) return cmd_ablate(args, bundle_arg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
