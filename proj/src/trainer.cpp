#include "dsgs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dsgs/metrics.hpp"
#include "dsgs/ply_io.hpp"

namespace dsgs {

namespace fs = std::filesystem;

TrainConfig TrainConfig::from_config(const Config& c) {
  TrainConfig t;
  t.sh_degree = c.get_int("model", "sh_degree", t.sh_degree);
  t.n_init = c.get_int("model", "n_init", t.n_init);
  t.init_radius = c.get_double("model", "init_radius", t.init_radius);
  t.init_opacity = c.get_double("model", "init_opacity", t.init_opacity);
  t.base_spatial = c.get_int("model", "base_spatial", t.base_spatial);
  t.base_time = c.get_int("model", "base_time", t.base_time);
  t.feat_dim = c.get_int("model", "feat_dim", t.feat_dim);
  t.multipliers = c.get_int_list("model", "multipliers", t.multipliers);
  t.mlp_width = c.get_int("model", "mlp_width", t.mlp_width);
  t.mlp_depth = c.get_int("model", "mlp_depth", t.mlp_depth);
  t.grid_offset = c.get_double("model", "grid_offset", t.grid_offset);
  t.grid_noise = c.get_double("model", "grid_noise", t.grid_noise);

  t.iterations = c.get_int("train", "iterations", t.iterations);
  t.warmup = c.get_int("train", "warmup", t.warmup);
  t.seed = uint64_t(c.get_int("train", "seed", int(t.seed)));
  t.lambdas.ramp_start = c.get_int("train", "ramp_start", 1400);
  t.lambdas.ramp_end = c.get_int("train", "ramp_end", 1800);
  t.lambdas.lambda1 = c.get_double("train", "lambda1", 0.05);
  t.lambdas.lambda2 = c.get_double("train", "lambda2", 0.02);
  t.tv_weight = c.get_double("train", "tv_weight", t.tv_weight);
  t.arap_samples = c.get_int("train", "arap_samples", t.arap_samples);
  t.knn_k = c.get_int("train", "knn_k", t.knn_k);
  t.graph_rebuild = c.get_int("train", "graph_rebuild", t.graph_rebuild);
  t.normal_mode = c.get_str("train", "normal_weight_mode", "downweight") == "printed"
                      ? NormalWeightMode::kPrinted
                      : NormalWeightMode::kProseDownweight;
  t.enable_normal = c.get_bool("train", "enable_normal", t.enable_normal);
  t.enable_arap = c.get_bool("train", "enable_arap", t.enable_arap);

  t.lrs.pos_init = c.get_double("optimizer", "pos_lr_init", t.lrs.pos_init);
  t.lrs.pos_final = c.get_double("optimizer", "pos_lr_final", t.lrs.pos_final);
  t.lrs.rot = c.get_double("optimizer", "rot_lr", t.lrs.rot);
  t.lrs.scale = c.get_double("optimizer", "scale_lr", t.lrs.scale);
  t.lrs.opacity = c.get_double("optimizer", "opacity_lr", t.lrs.opacity);
  t.lrs.sh = c.get_double("optimizer", "sh_lr", t.lrs.sh);
  t.grid_lr = c.get_double("optimizer", "grid_lr", t.grid_lr);
  t.mlp_lr = c.get_double("optimizer", "mlp_lr", t.mlp_lr);

  t.densify.tau_grad = c.get_double("densify", "tau_grad", t.densify.tau_grad);
  t.densify.tau_small = c.get_double("densify", "tau_small", t.densify.tau_small);
  t.densify.opacity_floor = c.get_double("densify", "opacity_floor", t.densify.opacity_floor);
  t.densify.split_factor = c.get_double("densify", "split_factor", t.densify.split_factor);
  t.densify.max_gaussians = c.get_int("densify", "max_gaussians", t.densify.max_gaussians);
  t.densify_every = c.get_int("densify", "every", t.densify_every);
  t.densify_start = c.get_int("densify", "start", t.densify_start);
  t.densify_until_frac = c.get_double("densify", "until_frac", t.densify_until_frac);

  t.out_dir = c.get_str("output", "dir", t.out_dir);
  t.checkpoint_every = c.get_int("output", "checkpoint_every", t.checkpoint_every);
  t.eval_every = c.get_int("output", "eval_every", t.eval_every);
  t.log_every = c.get_int("output", "log_every", t.log_every);
  return t;
}

void TrainConfig::validate() const {
  if (iterations < 0 || warmup < 0 || warmup > iterations)
    throw DsgsError("train config: need 0 <= warmup <= iterations");
  if (n_init < knn_k + 1) throw DsgsError("train config: n_init must exceed knn_k");
  if (sh_degree < 0 || sh_degree > 3) throw DsgsError("train config: sh_degree in [0,3]");
}

namespace {

GaussianCloud init_cloud(const TrainConfig& cfg, Rng& rng) {
  GaussianCloud cloud;
  cloud.sh_degree = cfg.sh_degree;
  cloud.resize(cfg.n_init);
  for (int i = 0; i < cfg.n_init; ++i) {
    // uniform in the init sphere
    Vec3 p;
    do {
      p = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    } while (p.squaredNorm() > 1.0);
    cloud.pos[i] = cfg.init_radius * p;
    cloud.opacity_raw[i] = logit(cfg.init_opacity);
  }
  // isotropic scale from the mean 3-NN distance, as in point-cloud inits
  for (int i = 0; i < cfg.n_init; ++i) {
    std::vector<double> d2;
    for (int j = 0; j < cfg.n_init; ++j)
      if (j != i) d2.push_back((cloud.pos[j] - cloud.pos[i]).squaredNorm());
    std::partial_sort(d2.begin(), d2.begin() + 3, d2.end());
    double mean = (std::sqrt(d2[0]) + std::sqrt(d2[1]) + std::sqrt(d2[2])) / 3.0;
    cloud.log_scale[i] = Vec3::Constant(std::log(std::max(mean, 1e-4)));
  }
  return cloud;
}

std::vector<double> cloud_radii(const GaussianCloud& cloud) {
  std::vector<double> r(cloud.size());
  for (int i = 0; i < cloud.size(); ++i) {
    Vec3 s = cloud.activated_scale(i);
    r[i] = std::cbrt(s.x() * s.y() * s.z());
  }
  return r;
}

}  // namespace

double evaluate_psnr(const GaussianCloud& cloud, const DeformModel& model,
                     const std::vector<Frame>& frames, const RenderOptions& opts) {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : frames) {
    GaussianCloud deformed = deform_cloud(model, cloud, f.view.time);
    RenderBuffers buf = rasterize(deformed, f.view, opts);
    sum += psnr(buf.color, f.image);
  }
  return sum / double(frames.size());
}

void save_checkpoint(const std::string& dir, const GaussianCloud& cloud,
                     const DeformModel& model, const CloudOptimizer* copt,
                     const ModelOptimizer* mopt, const Rng* rng, int iteration) {
  fs::create_directories(dir);
  save_ply(cloud, (fs::path(dir) / "cloud.ply").string());
  save_deform_model(model, (fs::path(dir) / "deform.bin").string());
  if (copt && mopt) {
    std::ofstream f((fs::path(dir) / "optim.bin").string(), std::ios::binary);
    copt->save(f);
    mopt->save(f);
  }
  if (rng) {
    std::ofstream f((fs::path(dir) / "rng.txt").string());
    f << const_cast<Rng*>(rng)->engine() << "\n";
  }
  std::ofstream meta((fs::path(dir) / "meta.txt").string());
  meta << "iteration = " << iteration << "\n";
  meta << "gaussians = " << cloud.size() << "\n";
}

void load_checkpoint(const std::string& dir, GaussianCloud& cloud, DeformModel& model) {
  cloud = load_ply((fs::path(dir) / "cloud.ply").string());
  model = load_deform_model((fs::path(dir) / "deform.bin").string());
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.train.empty()) throw DsgsError("train: empty dataset");
  fs::create_directories(cfg.out_dir);
  std::ofstream log_file((fs::path(cfg.out_dir) / "train_log.jsonl").string());

  Rng rng(cfg.seed);
  GaussianCloud cloud = init_cloud(cfg, rng);
  DeformModel model = DeformModel::make(cfg.base_spatial, cfg.base_time, cfg.feat_dim,
                                        cfg.multipliers, cfg.mlp_width, cfg.mlp_depth,
                                        dataset.bounds_min, dataset.bounds_max, rng,
                                        cfg.grid_offset);
  CloudOptimizer copt(cloud, cfg.lrs, cfg.iterations);
  ModelOptimizer mopt(model, cfg.grid_lr, cfg.mlp_lr);

  // sorted unique frame times for adjacent-time ARAP pairs
  std::vector<double> times;
  {
    std::set<double> ts;
    for (const auto& f : dataset.train) ts.insert(f.view.time);
    times.assign(ts.begin(), ts.end());
  }

  NeighborGraph graph = build_neighbor_graph(cloud.pos, cloud_radii(cloud), cfg.knn_k);
  const int densify_until = int(cfg.densify_until_frac * cfg.iterations);

  CloudGrads g_deformed, g_canonical;
  ModelGrads g_model = ModelGrads::zeros_like(model);
  DensifyStats stats;
  stats.resize(cloud.size());

  TrainResult result;
  GaussianCloud good_cloud = cloud;
  DeformModel good_model = model;
  int good_iter = 0;
  int bad_streak = 0;

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    const bool in_warmup = iter <= cfg.warmup;
    const Frame& frame = dataset.train[rng.index(int(dataset.train.size()))];
    auto [lam1, lam2] = cfg.lambdas.at(iter);
    if (!cfg.enable_normal) lam1 = 0.0;
    if (!cfg.enable_arap) lam2 = 0.0;

    g_deformed.resize_like(cloud);
    g_canonical.resize_like(cloud);
    g_model.set_zero();

    DeformCloudCache dcache;
    GaussianCloud working =
        in_warmup ? cloud : deform_cloud(model, cloud, frame.view.time, &dcache);

    RenderCache rcache;
    RenderBuffers buf = rasterize(working, frame.view, cfg.render, &rcache);

    BufferGrads bgrads;
    bgrads.resize(buf.width, buf.height);

    bool finite_ok = true;
    LossReport report;
    double photo = 0, tv = 0, normal = 0, arap = 0;
    std::vector<Vec3> arap_g2;
    DeformCloudCache dcache2;
    GaussianCloud cloud_t2;

    try {
      photo = photometric_loss(buf.color, frame.image, &bgrads.d_color);

      if (!in_warmup) {
        tv = cfg.tv_weight * hexplane_tv(model.field);
        if (lam1 > 0.0)
          normal = normal_consistency_loss(buf, frame.image, frame.view, cfg.normal_mode,
                                           &bgrads);
        if (lam2 > 0.0 && times.size() >= 2) {
          // t1 = frame time, t2 uniform over the other training timestamps
          double t2 = frame.view.time;
          while (t2 == frame.view.time) t2 = times[size_t(rng.index(int(times.size())))];
          cloud_t2 = deform_cloud(model, cloud, t2, &dcache2);

          std::vector<int> samples;
          int n_s = std::min(cfg.arap_samples, cloud.size());
          samples.reserve(n_s);
          for (int s = 0; s < n_s; ++s) samples.push_back(rng.index(cloud.size()));
          arap_g2.assign(cloud.size(), Vec3::Zero());
          std::vector<Vec3> arap_g1(cloud.size(), Vec3::Zero());
          arap = arap_loss(working.pos, cloud_t2.pos, graph, samples, &arap_g1, &arap_g2);
          for (int i = 0; i < cloud.size(); ++i) g_deformed.pos[i] += lam2 * arap_g1[i];
        }
      }
      report = total_loss(photo, tv, normal, arap, cfg.lambdas, iter);
      if (!cfg.enable_normal) report.lambda1 = 0.0;
      if (!cfg.enable_arap) report.lambda2 = 0.0;
      report.total = photo + tv + lam1 * normal + lam2 * arap;
    } catch (const DsgsError&) {
      finite_ok = false;
    }

    if (!finite_ok) {
      if (++bad_streak >= 10) {
        save_checkpoint((fs::path(cfg.out_dir) / "checkpoint_aborted").string(),
                        good_cloud, good_model, nullptr, nullptr, nullptr, good_iter);
        result.cloud = good_cloud;
        result.model = good_model;
        result.aborted = true;
        result.gaussians = good_cloud.size();
        log_file << "{\"iter\":" << iter << ",\"event\":\"abort\"}\n";
        return result;
      }
      continue;
    }
    bad_streak = 0;

    // scale buffer grads by the loss weights before the render backward
    if (lam1 != 0.0 && !in_warmup) {
      for (double& v : bgrads.d_normal.data) v *= lam1;
      for (double& v : bgrads.d_distance.data) v *= lam1;
    }

    rasterize_backward(working, rcache, buf, bgrads, g_deformed, &stats);

    std::vector<std::string> skipped;
    if (in_warmup) {
      copt.step(cloud, g_deformed, iter, &skipped);
    } else {
      deform_cloud_backward(model, cloud, dcache, g_deformed, g_canonical, g_model);
      if (!arap_g2.empty()) {
        CloudGrads g_t2;
        g_t2.resize_like(cloud);
        for (int i = 0; i < cloud.size(); ++i) g_t2.pos[i] = lam2 * arap_g2[i];
        deform_cloud_backward(model, cloud, dcache2, g_t2, g_canonical, g_model);
      }
      if (tv != 0.0) hexplane_tv_backward(model.field, cfg.tv_weight, g_model.field);
      copt.step(cloud, g_canonical, iter, &skipped);
      mopt.step(model, g_model, iter - cfg.warmup, &skipped);
    }
    for (const auto& s : skipped)
      log_file << "{\"iter\":" << iter << ",\"event\":\"skip\",\"group\":\"" << s << "\"}\n";

    if (cfg.log_every > 0 && iter % cfg.log_every == 0)
      log_file << loss_report_json(report) << "\n";

    good_cloud = cloud;
    good_model = model;
    good_iter = iter;

    bool densified = false;
    if (cfg.densify_every > 0 && iter >= cfg.densify_start && iter <= densify_until &&
        iter % cfg.densify_every == 0) {
      DensifyResult dr = densify_and_prune(cloud, copt, stats, cfg.densify, rng);
      stats.resize(cloud.size());
      densified = dr.cloned + dr.split + dr.pruned > 0;
      if (densified)
        log_file << "{\"iter\":" << iter << ",\"event\":\"densify\",\"cloned\":"
                 << dr.cloned << ",\"split\":" << dr.split << ",\"pruned\":" << dr.pruned
                 << ",\"gaussians\":" << cloud.size() << "}\n";
    }
    if (densified || (cfg.graph_rebuild > 0 && iter % cfg.graph_rebuild == 0))
      graph = build_neighbor_graph(cloud.pos, cloud_radii(cloud), cfg.knn_k);

    if (cfg.eval_every > 0 && iter % cfg.eval_every == 0 && !dataset.test.empty()) {
      double p = evaluate_psnr(cloud, model, dataset.test, cfg.render);
      log_file << "{\"iter\":" << iter << ",\"event\":\"eval\",\"test_psnr\":" << p << "}\n";
    }
    if (cfg.checkpoint_every > 0 && iter % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_%06d", iter);
      save_checkpoint((fs::path(cfg.out_dir) / name).string(), cloud, model, &copt,
                      &mopt, &rng, iter);
    }
  }

  save_checkpoint((fs::path(cfg.out_dir) / "checkpoint_final").string(), cloud, model,
                  &copt, &mopt, &rng, cfg.iterations);
  result.cloud = std::move(cloud);
  result.model = std::move(model);
  result.gaussians = result.cloud.size();
  if (!dataset.test.empty())
    result.final_test_psnr =
        evaluate_psnr(result.cloud, result.model, dataset.test, cfg.render);
  return result;
}

}  // namespace dsgs
