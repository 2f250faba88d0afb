#pragma once

#include <string>
#include <vector>

#include "dsgs/config.hpp"
#include "dsgs/dataset.hpp"
#include "dsgs/deform_model.hpp"
#include "dsgs/losses.hpp"
#include "dsgs/optim.hpp"
#include "dsgs/renderer.hpp"

namespace dsgs {

struct TrainConfig {
  // model
  int sh_degree = 1;
  int n_init = 400;
  double init_radius = 0.75;      // canonical points start inside this sphere
  double init_opacity = 0.1;
  int base_spatial = 32, base_time = 16, feat_dim = 16;
  std::vector<int> multipliers = {1, 2};
  int mlp_width = 64, mlp_depth = 2;
  double grid_offset = 1.0, grid_noise = 1e-2;

  // schedule
  int iterations = 4000;
  int warmup = 1000;
  uint64_t seed = 0;
  LambdaSchedule lambdas;         // defaults set in from_config
  double tv_weight = 1e-3;
  int arap_samples = 4096;
  int knn_k = 10;
  int graph_rebuild = 500;
  NormalWeightMode normal_mode = NormalWeightMode::kProseDownweight;
  bool enable_normal = true;      // ablation switches
  bool enable_arap = true;

  // optimizer
  CloudLearningRates lrs;
  double grid_lr = 2e-3;
  double mlp_lr = 2e-4;

  // densification
  DensifyThresholds densify;
  int densify_every = 100;
  int densify_start = 500;
  double densify_until_frac = 0.6;

  // io
  std::string out_dir = "out";
  int checkpoint_every = 2000;
  int eval_every = 500;
  int log_every = 1;
  RenderOptions render;

  static TrainConfig from_config(const Config& c);
  void validate() const;
};

struct TrainResult {
  GaussianCloud cloud;
  DeformModel model;
  double final_test_psnr = 0.0;   // 0 when no test split
  int gaussians = 0;
  bool aborted = false;
};

TrainResult train(const Dataset& dataset, const TrainConfig& cfg);

// Checkpoint directory: cloud.ply + deform.bin (+ optimizer/rng state).
void save_checkpoint(const std::string& dir, const GaussianCloud& cloud,
                     const DeformModel& model, const CloudOptimizer* copt = nullptr,
                     const ModelOptimizer* mopt = nullptr, const Rng* rng = nullptr,
                     int iteration = 0);
void load_checkpoint(const std::string& dir, GaussianCloud& cloud, DeformModel& model);

// Mean PSNR of the given frames rendered through the deformation model.
double evaluate_psnr(const GaussianCloud& cloud, const DeformModel& model,
                     const std::vector<Frame>& frames, const RenderOptions& opts);

}  // namespace dsgs
