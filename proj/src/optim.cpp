#include "dsgs/optim.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace dsgs {

bool adam_step_group(AdamGroup& g, double* params, const double* grads, size_t n,
                     int t, const AdamConfig& cfg, double lr_scale) {
  if (g.m.size() != n) throw DsgsError("adam: moment/parameter size mismatch in " + g.name);
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(grads[i])) return false;
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const double lr = g.lr * lr_scale;
  for (size_t i = 0; i < n; ++i) {
    g.m[i] = cfg.beta1 * g.m[i] + (1.0 - cfg.beta1) * grads[i];
    g.v[i] = cfg.beta2 * g.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    double mhat = g.m[i] / bc1, vhat = g.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
  return true;
}

double expon_lr(double lr_init, double lr_final, int step, int total) {
  if (step <= 0) return lr_init;
  if (step >= total) return lr_final;
  double f = double(step) / double(total);
  return lr_init * std::pow(lr_final / lr_init, f);
}

CloudOptimizer::CloudOptimizer(const GaussianCloud& cloud, const CloudLearningRates& lrs,
                               int total_iterations)
    : lrs_(lrs), total_(std::max(1, total_iterations)) {
  const size_t n = size_t(cloud.size());
  pos_.init("pos", lrs.pos_init, n * 3);
  rot_.init("rot", lrs.rot, n * 4);
  scale_.init("scale", lrs.scale, n * 3);
  opacity_.init("opacity", lrs.opacity, n);
  sh_.init("sh", lrs.sh, cloud.sh.size());
}

void CloudOptimizer::step(GaussianCloud& cloud, const CloudGrads& grads, int t,
                          std::vector<std::string>* skipped) {
  const size_t n = size_t(cloud.size());
  auto run = [&](AdamGroup& g, double* p, const double* d, size_t len, double scale = 1.0) {
    if (!adam_step_group(g, p, d, len, t, cfg_, scale) && skipped)
      skipped->push_back(g.name);
  };
  double pos_scale = expon_lr(lrs_.pos_init, lrs_.pos_final, t, total_) / lrs_.pos_init;
  run(pos_, reinterpret_cast<double*>(cloud.pos.data()),
      reinterpret_cast<const double*>(grads.pos.data()), n * 3, pos_scale);
  run(rot_, reinterpret_cast<double*>(cloud.rot_raw.data()),
      reinterpret_cast<const double*>(grads.rot_raw.data()), n * 4);
  run(scale_, reinterpret_cast<double*>(cloud.log_scale.data()),
      reinterpret_cast<const double*>(grads.log_scale.data()), n * 3);
  run(opacity_, cloud.opacity_raw.data(), grads.opacity_raw.data(), n);
  run(sh_, cloud.sh.data(), grads.sh.data(), cloud.sh.size());
}

void CloudOptimizer::remap_rows(const std::vector<int>& keep_src, int sh_dim) {
  auto remap = [&](AdamGroup& g, int stride) {
    std::vector<double> m(keep_src.size() * stride, 0.0), v(keep_src.size() * stride, 0.0);
    for (size_t i = 0; i < keep_src.size(); ++i) {
      int s = keep_src[i];
      if (s < 0) continue;
      std::memcpy(&m[i * stride], &g.m[size_t(s) * stride], stride * sizeof(double));
      std::memcpy(&v[i * stride], &g.v[size_t(s) * stride], stride * sizeof(double));
    }
    g.m = std::move(m);
    g.v = std::move(v);
  };
  remap(pos_, 3);
  remap(rot_, 4);
  remap(scale_, 3);
  remap(opacity_, 1);
  remap(sh_, sh_dim);
}

namespace {

void write_group(std::ostream& os, const AdamGroup& g) {
  uint64_t n = g.m.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(g.m.data()), n * sizeof(double));
  os.write(reinterpret_cast<const char*>(g.v.data()), n * sizeof(double));
}

void read_group(std::istream& is, AdamGroup& g, size_t expected) {
  uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!is || n != expected)
    throw DsgsError("optimizer state: group size mismatch in " + g.name);
  g.m.resize(n);
  g.v.resize(n);
  is.read(reinterpret_cast<char*>(g.m.data()), n * sizeof(double));
  is.read(reinterpret_cast<char*>(g.v.data()), n * sizeof(double));
  if (!is) throw DsgsError("optimizer state: truncated");
}

}  // namespace

void CloudOptimizer::save(std::ostream& os) const {
  for (const AdamGroup* g : {&pos_, &rot_, &scale_, &opacity_, &sh_}) write_group(os, *g);
}

void CloudOptimizer::load(std::istream& is, const GaussianCloud& cloud) {
  const size_t n = size_t(cloud.size());
  read_group(is, pos_, n * 3);
  read_group(is, rot_, n * 4);
  read_group(is, scale_, n * 3);
  read_group(is, opacity_, n);
  read_group(is, sh_, cloud.sh.size());
}

ModelOptimizer::ModelOptimizer(const DeformModel& model, double grid_lr, double mlp_lr) {
  for (size_t s = 0; s < model.field.scales.size(); ++s)
    for (int p = 0; p < 6; ++p) {
      AdamGroup g;
      g.init("grid_" + std::to_string(s) + "_" + std::to_string(p), grid_lr,
             model.field.scales[s].planes[p].v.size());
      grid_groups_.push_back(std::move(g));
    }
  for (size_t l = 0; l < model.decoder.W.size(); ++l) {
    AdamGroup gw, gb;
    gw.init("W" + std::to_string(l), mlp_lr, size_t(model.decoder.W[l].size()));
    gb.init("b" + std::to_string(l), mlp_lr, size_t(model.decoder.b[l].size()));
    mlp_groups_.push_back(std::move(gw));
    mlp_groups_.push_back(std::move(gb));
  }
}

void ModelOptimizer::step(DeformModel& model, const ModelGrads& grads, int t,
                          std::vector<std::string>* skipped) {
  size_t gi = 0;
  for (size_t s = 0; s < model.field.scales.size(); ++s)
    for (int p = 0; p < 6; ++p, ++gi) {
      auto& plane = model.field.scales[s].planes[p];
      const auto& gplane = grads.field.scales[s].planes[p];
      if (!adam_step_group(grid_groups_[gi], plane.v.data(), gplane.v.data(),
                           plane.v.size(), t, cfg_) && skipped)
        skipped->push_back(grid_groups_[gi].name);
    }
  size_t mi = 0;
  for (size_t l = 0; l < model.decoder.W.size(); ++l) {
    if (!adam_step_group(mlp_groups_[mi], model.decoder.W[l].data(),
                         grads.decoder.W[l].data(), size_t(model.decoder.W[l].size()),
                         t, cfg_) && skipped)
      skipped->push_back(mlp_groups_[mi].name);
    ++mi;
    if (!adam_step_group(mlp_groups_[mi], model.decoder.b[l].data(),
                         grads.decoder.b[l].data(), size_t(model.decoder.b[l].size()),
                         t, cfg_) && skipped)
      skipped->push_back(mlp_groups_[mi].name);
    ++mi;
  }
}

void ModelOptimizer::save(std::ostream& os) const {
  for (const auto& g : grid_groups_) write_group(os, g);
  for (const auto& g : mlp_groups_) write_group(os, g);
}

void ModelOptimizer::load(std::istream& is, const DeformModel& model) {
  ModelOptimizer fresh(model, 0.0, 0.0);
  if (fresh.grid_groups_.size() != grid_groups_.size() ||
      fresh.mlp_groups_.size() != mlp_groups_.size())
    throw DsgsError("optimizer state: model shape mismatch");
  for (auto& g : grid_groups_) read_group(is, g, g.m.size());
  for (auto& g : mlp_groups_) read_group(is, g, g.m.size());
}

DensifyResult densify_and_prune(GaussianCloud& cloud, CloudOptimizer& opt,
                                const DensifyStats& stats, const DensifyThresholds& th,
                                Rng& rng) {
  const int n = cloud.size();
  const int sh_dim = cloud.sh_dim();
  DensifyResult res;

  GaussianCloud out;
  out.sh_degree = cloud.sh_degree;
  std::vector<int> src_rows;  // optimizer moment source per new row (-1 = fresh)

  auto push = [&](int src, const Vec3& p, const Vec4& r, const Vec3& ls, double op,
                  bool fresh_state) {
    out.pos.push_back(p);
    out.rot_raw.push_back(r);
    out.log_scale.push_back(ls);
    out.opacity_raw.push_back(op);
    out.sh.insert(out.sh.end(), cloud.sh_ptr(src), cloud.sh_ptr(src) + sh_dim);
    src_rows.push_back(fresh_state ? -1 : src);
  };

  const bool can_grow = n < th.max_gaussians;
  const double log_split = std::log(th.split_factor);
  for (int i = 0; i < n; ++i) {
    if (cloud.activated_opacity(i) < th.opacity_floor) {
      ++res.pruned;
      continue;
    }
    double mean_grad = stats.observations[i] > 0
                           ? stats.grad2d_accum[i] / double(stats.observations[i])
                           : 0.0;
    double max_scale = cloud.activated_scale(i).maxCoeff();
    if (can_grow && mean_grad > th.tau_grad) {
      if (max_scale < th.tau_small) {
        // clone: exact copy, both rows keep learning from here
        push(i, cloud.pos[i], cloud.rot_raw[i], cloud.log_scale[i], cloud.opacity_raw[i], false);
        push(i, cloud.pos[i], cloud.rot_raw[i], cloud.log_scale[i], cloud.opacity_raw[i], true);
        ++res.cloned;
      } else {
        // split: two children sampled from the parent, scales / split_factor
        Mat3 R = quat_to_rot(normalize_quat(cloud.rot_raw[i]));
        Vec3 s = cloud.activated_scale(i);
        Vec3 child_ls = cloud.log_scale[i] - Vec3::Constant(log_split);
        for (int c = 0; c < 2; ++c) {
          Vec3 local(rng.normal() * s.x(), rng.normal() * s.y(), rng.normal() * s.z());
          push(i, cloud.pos[i] + R * local, cloud.rot_raw[i], child_ls,
               cloud.opacity_raw[i], true);
        }
        ++res.split;
      }
    } else {
      push(i, cloud.pos[i], cloud.rot_raw[i], cloud.log_scale[i], cloud.opacity_raw[i], false);
    }
  }

  cloud = std::move(out);
  opt.remap_rows(src_rows, sh_dim);
  return res;
}

}  // namespace dsgs
