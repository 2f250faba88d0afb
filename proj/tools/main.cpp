// dynasurfgs: planar-based Gaussian splatting for dynamic surface
// reconstruction — training, rendering, mesh extraction and evaluation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dsgs/config.hpp"
#include "dsgs/dataset.hpp"
#include "dsgs/extract.hpp"
#include "dsgs/metrics.hpp"
#include "dsgs/synthetic.hpp"
#include "dsgs/trainer.hpp"

namespace fs = std::filesystem;
using namespace dsgs;

namespace {

void print_usage() {
  std::cout <<
      "usage: dynasurfgs <subcommand> [options]\n"
      "\n"
      "subcommands:\n"
      "  synth         generate a synthetic dataset with ground-truth meshes\n"
      "  train         train a model from a config file\n"
      "  render        render color/normal/depth from a checkpoint\n"
      "  extract-mesh  TSDF-fuse virtual depth views into a mesh\n"
      "  eval          compare images (psnr/ssim) or meshes (cd/emd)\n"
      "  info          inspect checkpoints, datasets or default config\n"
      "\n"
      "run 'dynasurfgs <subcommand> --help' for per-command options\n";
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_synth(CLI::App& app, int argc, char** argv) {
  SyntheticSceneSpec spec;
  std::string out = "synth_out";
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--primitive", spec.primitive, "sphere | cube | two-blob");
  app.add_option("--motion", spec.motion, "static | translate | rotate | articulate");
  app.add_option("--frames", spec.n_frames, "distinct timesteps");
  app.add_option("--train-views", spec.n_train_views, "training images");
  app.add_option("--test-views", spec.n_test_views, "held-out images");
  app.add_option("--resolution", spec.resolution, "square image size");
  app.add_option("--seed", spec.seed, "rng seed");
  CLI11_PARSE(app, argc, argv);
  generate_synthetic(spec, out);
  std::cout << "wrote dataset to " << out << "\n";
  return 0;
}

int cmd_train(CLI::App& app, int argc, char** argv) {
  std::string config_path, data_override, out_override;
  int seed_override = -1, iter_override = -1;
  app.add_option("--config", config_path, "training config file")->required();
  app.add_option("--data", data_override, "dataset directory (overrides config)");
  app.add_option("--out", out_override, "output directory (overrides config)");
  app.add_option("--seed", seed_override, "rng seed (overrides config)");
  app.add_option("--iterations", iter_override, "iteration count (overrides config)");
  CLI11_PARSE(app, argc, argv);

  Config c = Config::parse_file(config_path);
  TrainConfig cfg = TrainConfig::from_config(c);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override >= 0) cfg.seed = uint64_t(seed_override);
  if (iter_override >= 0) cfg.iterations = iter_override;

  std::string data_dir = !data_override.empty() ? data_override
                                                : c.get_str("dataset", "path", "");
  if (data_dir.empty()) throw DsgsError("train: no dataset path (config [dataset] path or --data)");
  DatasetOptions dopts;
  dopts.downscale = c.get_int("dataset", "downscale", 1);
  Dataset ds = load_dataset(data_dir, dopts);

  for (const auto& k : c.unused_keys())
    std::cerr << "warning: unused config key " << k << "\n";

  TrainResult res = train(ds, cfg);
  std::cout << "trained " << res.gaussians << " gaussians";
  if (res.final_test_psnr > 0) std::cout << ", test psnr " << res.final_test_psnr << " dB";
  std::cout << (res.aborted ? " (ABORTED on divergence)" : "") << "\n";
  return res.aborted ? 1 : 0;
}

int cmd_render(CLI::App& app, int argc, char** argv) {
  std::string checkpoint, out_prefix = "render", data_dir;
  double time = 0.0, azimuth = 0.6, elevation = 0.4, radius = 3.2, fov = 0.8726646259971648;
  int pose_index = -1, size = 256;
  app.add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  app.add_option("--time", time, "normalized time in [0,1]");
  app.add_option("--out", out_prefix, "output path prefix");
  app.add_option("--data", data_dir, "dataset directory (for --pose-index)");
  app.add_option("--pose-index", pose_index, "use this training pose");
  app.add_option("--orbit-azimuth", azimuth, "orbit camera azimuth (rad)");
  app.add_option("--orbit-elevation", elevation, "orbit camera elevation (rad)");
  app.add_option("--orbit-radius", radius, "orbit camera distance");
  app.add_option("--fov", fov, "horizontal field of view (rad)");
  app.add_option("--size", size, "square image size for orbit cameras");
  CLI11_PARSE(app, argc, argv);

  GaussianCloud cloud;
  DeformModel model;
  load_checkpoint(checkpoint, cloud, model);

  CameraView view;
  if (pose_index >= 0) {
    if (data_dir.empty()) throw DsgsError("render: --pose-index requires --data");
    Dataset ds = load_dataset(data_dir);
    if (pose_index >= int(ds.train.size()))
      throw DsgsError("render: pose index out of range");
    view = ds.train[pose_index].view;
    view.time = time;
  } else {
    Vec3 eye = radius * Vec3(std::cos(elevation) * std::cos(azimuth),
                             std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
    view = look_at_camera(eye, Vec3::Zero(), Vec3(0, 0, 1), fov, size, size, time);
  }

  GaussianCloud deformed = deform_cloud(model, cloud, std::clamp(time, 0.0, 1.0));
  RenderOptions ropts;
  RenderBuffers buf = rasterize(deformed, view, ropts);

  write_png_rgb(out_prefix + "_color.png", buf.color);
  Image3 nvis(buf.width, buf.height);
  for (int y = 0; y < buf.height; ++y)
    for (int x = 0; x < buf.width; ++x)
      nvis.set_pixel(y, x, 0.5 * (buf.normal.pixel(y, x) + Vec3::Ones()));
  write_png_rgb(out_prefix + "_normal.png", nvis);
  double dmax = 0.0;
  for (size_t i = 0; i < buf.depth.data.size(); ++i)
    if (buf.depth_valid[i]) dmax = std::max(dmax, buf.depth.data[i]);
  write_png_gray16(out_prefix + "_depth.png", buf.depth, dmax > 0 ? dmax : 1.0);
  std::cout << "wrote " << out_prefix << "_{color,normal,depth}.png\n";
  return 0;
}

int cmd_extract_mesh(CLI::App& app, int argc, char** argv) {
  std::string checkpoint, out = "mesh.ply";
  MeshExtractOptions opts;
  double time = 0.0;
  bool no_deform = false;
  app.add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  app.add_option("--time", time, "normalized time in [0,1]");
  app.add_option("--out", out, "output mesh path (.ply or .obj)");
  app.add_option("--resolution", opts.volume_resolution, "TSDF voxels per axis");
  app.add_option("--extent", opts.extent, "fusion cube side length");
  app.add_option("--views", opts.n_views, "virtual view count");
  app.add_option("--cam-radius", opts.cam_radius, "virtual camera distance");
  app.add_option("--image-size", opts.image_size, "virtual view resolution");
  app.add_flag("--no-deform", no_deform, "extract the canonical cloud directly");
  CLI11_PARSE(app, argc, argv);

  GaussianCloud cloud;
  DeformModel model;
  load_checkpoint(checkpoint, cloud, model);
  Mesh mesh = extract_dynamic_mesh(cloud, no_deform ? nullptr : &model, time, opts);
  if (mesh.empty()) {
    std::cerr << "error: {\"message\":\"empty extraction\"}\n";
    return 1;
  }
  if (ends_with(out, ".obj")) save_mesh_obj(mesh, out);
  else save_mesh_ply(mesh, out);
  std::cout << "wrote " << out << " (" << mesh.vertices.size() << " vertices, "
            << mesh.triangles.size() << " triangles)\n";
  return 0;
}

int cmd_eval(CLI::App& app, int argc, char** argv) {
  std::string pred, gt, report_path;
  int emd_n = 512, cd_samples = 100000;
  uint64_t seed = 0;
  app.add_option("--pred", pred, "predicted image (.png) or mesh (.ply/.obj)")->required();
  app.add_option("--gt", gt, "reference image or mesh")->required();
  app.add_option("--report", report_path, "write the JSON report here too");
  app.add_option("--emd-n", emd_n, "EMD subsample size");
  app.add_option("--cd-samples", cd_samples, "surface samples for chamfer");
  app.add_option("--seed", seed, "sampling seed");
  CLI11_PARSE(app, argc, argv);

  std::ostringstream js;
  js.precision(10);
  if (ends_with(pred, ".png")) {
    Image3 a = composite_over(read_png(pred), Vec3(1, 1, 1));
    Image3 b = composite_over(read_png(gt), Vec3(1, 1, 1));
    js << "{\"psnr\":" << psnr(a, b) << ",\"ssim\":" << ssim(a, b)
       << ",\"conventions\":{\"psnr_cap_db\":100,\"ssim_window\":11}}";
  } else {
    Mesh ma = load_mesh(pred), mb = load_mesh(gt);
    Rng rng(seed);
    auto pa = sample_mesh_surface(ma, cd_samples, rng);
    auto pb = sample_mesh_surface(mb, cd_samples, rng);
    double cd = chamfer_distance_milli(pa, pb);
    double e = emd(pa, pb, rng, emd_n);
    js << "{\"cd\":" << cd << ",\"emd\":" << e
       << ",\"conventions\":{\"cd\":\"symmetric mean non-squared, units 1e-3\","
       << "\"emd\":\"exact assignment, n<=" << emd_n << "\"},\"seed\":" << seed << "}";
  }
  std::cout << js.str() << "\n";
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    f << js.str() << "\n";
  }
  return 0;
}

int cmd_info(CLI::App& app, int argc, char** argv) {
  std::string checkpoint, data_dir;
  bool defaults = false;
  app.add_option("--checkpoint", checkpoint, "checkpoint directory to summarize");
  app.add_option("--data", data_dir, "dataset directory to summarize");
  app.add_flag("--defaults", defaults, "print the full default config");
  CLI11_PARSE(app, argc, argv);

  if (defaults) {
    TrainConfig d;
    std::cout << "[dataset]\npath = \ndownscale = 1\n\n"
              << "[model]\nsh_degree = " << d.sh_degree << "\nn_init = " << d.n_init
              << "\ninit_radius = " << d.init_radius << "\ninit_opacity = " << d.init_opacity
              << "\nbase_spatial = " << d.base_spatial << "\nbase_time = " << d.base_time
              << "\nfeat_dim = " << d.feat_dim << "\nmultipliers = 1,2"
              << "\nmlp_width = " << d.mlp_width << "\nmlp_depth = " << d.mlp_depth
              << "\ngrid_offset = " << d.grid_offset << "\ngrid_noise = " << d.grid_noise
              << "\n\n[train]\niterations = " << d.iterations << "\nwarmup = " << d.warmup
              << "\nseed = 0\nramp_start = 1400\nramp_end = 1800\nlambda1 = 0.05"
              << "\nlambda2 = 0.02\ntv_weight = " << d.tv_weight
              << "\narap_samples = " << d.arap_samples << "\nknn_k = " << d.knn_k
              << "\ngraph_rebuild = " << d.graph_rebuild
              << "\nnormal_weight_mode = downweight\nenable_normal = true\nenable_arap = true"
              << "\n\n[optimizer]\npos_lr_init = " << d.lrs.pos_init
              << "\npos_lr_final = " << d.lrs.pos_final << "\nrot_lr = " << d.lrs.rot
              << "\nscale_lr = " << d.lrs.scale << "\nopacity_lr = " << d.lrs.opacity
              << "\nsh_lr = " << d.lrs.sh << "\ngrid_lr = " << d.grid_lr
              << "\nmlp_lr = " << d.mlp_lr
              << "\n\n[densify]\ntau_grad = " << d.densify.tau_grad
              << "\ntau_small = " << d.densify.tau_small
              << "\nopacity_floor = " << d.densify.opacity_floor
              << "\nsplit_factor = " << d.densify.split_factor
              << "\nmax_gaussians = " << d.densify.max_gaussians
              << "\nevery = " << d.densify_every << "\nstart = " << d.densify_start
              << "\nuntil_frac = " << d.densify_until_frac
              << "\n\n[output]\ndir = out\ncheckpoint_every = " << d.checkpoint_every
              << "\neval_every = " << d.eval_every << "\nlog_every = " << d.log_every << "\n";
    return 0;
  }
  if (!checkpoint.empty()) {
    GaussianCloud cloud;
    DeformModel model;
    load_checkpoint(checkpoint, cloud, model);
    std::cout << "checkpoint " << checkpoint << "\n"
              << "  gaussians: " << cloud.size() << " (sh degree " << cloud.sh_degree << ")\n"
              << "  hexplane scales: " << model.field.scales.size()
              << ", feature dim " << model.field.feat_dim
              << ", grid params: " << model.field.param_count() << "\n"
              << "  decoder params: " << model.decoder.param_count() << "\n";
    return 0;
  }
  if (!data_dir.empty()) {
    Dataset ds = load_dataset(data_dir);
    std::cout << "dataset " << data_dir << "\n"
              << "  train frames: " << ds.train.size() << ", test frames: " << ds.test.size()
              << "\n  resolution: " << (ds.train.empty() ? 0 : ds.train[0].view.width)
              << "x" << (ds.train.empty() ? 0 : ds.train[0].view.height)
              << "\n  camera_angle_x: " << ds.camera_angle_x << "\n";
    return 0;
  }
  std::cout << "info: pass --checkpoint, --data or --defaults\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage();
    return 2;
  }
  std::string sub = argv[1];
  if (sub == "-h" || sub == "--help") {
    print_usage();
    return 0;
  }
  try {
    CLI::App app{"dynasurfgs " + sub};
    if (sub == "synth") return cmd_synth(app, argc - 1, argv + 1);
    if (sub == "train") return cmd_train(app, argc - 1, argv + 1);
    if (sub == "render") return cmd_render(app, argc - 1, argv + 1);
    if (sub == "extract-mesh") return cmd_extract_mesh(app, argc - 1, argv + 1);
    if (sub == "eval") return cmd_eval(app, argc - 1, argv + 1);
    if (sub == "info") return cmd_info(app, argc - 1, argv + 1);
  } catch (const std::exception& e) {
    std::cerr << "error: {\"message\":\"" << e.what() << "\"}\n";
    return 1;
  }
  std::cerr << "error: unknown subcommand '" << sub << "'\n\n";
  print_usage();
  return 2;
}
