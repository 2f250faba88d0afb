#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dsgs/deform_model.hpp"
#include "dsgs/gaussian_cloud.hpp"
#include "dsgs/renderer.hpp"
#include "dsgs/rng.hpp"

namespace dsgs {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One named parameter group with flat first/second moment buffers.
struct AdamGroup {
  std::string name;
  double lr = 0.0;
  std::vector<double> m, v;

  void init(const std::string& n, double learning_rate, size_t size) {
    name = n;
    lr = learning_rate;
    m.assign(size, 0.0);
    v.assign(size, 0.0);
  }
};

// Bias-corrected Adam update on a flat view of the parameters. Returns false
// (and leaves params and moments untouched) when any gradient is non-finite.
bool adam_step_group(AdamGroup& g, double* params, const double* grads, size_t n,
                     int t, const AdamConfig& cfg, double lr_scale = 1.0);

// Exponential interpolation lr_init -> lr_final across `total` steps.
double expon_lr(double lr_init, double lr_final, int step, int total);

struct CloudLearningRates {
  double pos_init = 1.6e-4;
  double pos_final = 1.6e-6;
  double rot = 1e-3;
  double scale = 5e-3;
  double opacity = 5e-2;
  double sh = 2.5e-3;
};

// Adam over the five Gaussian parameter groups; knows how to rebuild its
// moment rows when the cloud is densified or pruned.
class CloudOptimizer {
 public:
  CloudOptimizer() = default;
  CloudOptimizer(const GaussianCloud& cloud, const CloudLearningRates& lrs,
                 int total_iterations);

  // `t` is the global 1-based step count used for bias correction; the
  // position group's lr decays with it. Non-finite groups are skipped and
  // their names appended to `skipped` if given.
  void step(GaussianCloud& cloud, const CloudGrads& grads, int t,
            std::vector<std::string>* skipped = nullptr);

  // keep_src[i] >= 0 means row i of the new layout copies moment row
  // keep_src[i] of the old one; -1 means fresh (zeroed) row.
  void remap_rows(const std::vector<int>& keep_src, int sh_dim);

  void save(std::ostream& os) const;
  void load(std::istream& is, const GaussianCloud& cloud);

 private:
  AdamConfig cfg_;
  CloudLearningRates lrs_;
  int total_ = 1;
  AdamGroup pos_, rot_, scale_, opacity_, sh_;
  friend struct OptimizerIo;
};

// Adam over the HexPlane grids and decoder weights.
class ModelOptimizer {
 public:
  ModelOptimizer() = default;
  ModelOptimizer(const DeformModel& model, double grid_lr, double mlp_lr);

  void step(DeformModel& model, const ModelGrads& grads, int t,
            std::vector<std::string>* skipped = nullptr);

  void save(std::ostream& os) const;
  void load(std::istream& is, const DeformModel& model);

 private:
  AdamConfig cfg_;
  std::vector<AdamGroup> grid_groups_;  // one per plane per scale
  std::vector<AdamGroup> mlp_groups_;   // W0, b0, W1, b1, ...
};

struct DensifyThresholds {
  double tau_grad = 2e-4;
  double tau_small = 0.01;       // activated-scale split boundary
  double opacity_floor = 0.005;
  double split_factor = 1.6;
  int max_gaussians = 200000;
};

struct DensifyResult {
  int cloned = 0, split = 0, pruned = 0;
};

// Clone small high-gradient Gaussians, split large ones (2 children, scales
// divided by split_factor, positions sampled from the parent), prune low
// opacity; the optimizer's moment rows are rebuilt to match.
DensifyResult densify_and_prune(GaussianCloud& cloud, CloudOptimizer& opt,
                                const DensifyStats& stats, const DensifyThresholds& th,
                                Rng& rng);

}  // namespace dsgs
