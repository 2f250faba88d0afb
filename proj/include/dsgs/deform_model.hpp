#pragma once

#include <string>

#include "dsgs/gaussian_cloud.hpp"
#include "dsgs/hexplane.hpp"
#include "dsgs/mlp.hpp"

namespace dsgs {

struct DeformOutput {
  Vec3 d_mu = Vec3::Zero();
  Vec4 d_rot = Vec4::Zero();
  Vec3 d_scale = Vec3::Zero();
};

// Encoder + decoder pair predicting per-Gaussian raw-space deformations.
struct DeformModel {
  HexPlaneField field;
  Mlp decoder;

  static DeformModel make(int base_spatial, int base_time, int feat_dim,
                          const std::vector<int>& multipliers, int width, int depth,
                          const Vec3& bmin, const Vec3& bmax, Rng& rng,
                          double grid_offset = 1.0);
};

struct ModelGrads {
  HexPlaneField field;  // zero-shaped gradient holders
  Mlp decoder;

  static ModelGrads zeros_like(const DeformModel& m) {
    return {m.field.zeros_like(), m.decoder.zeros_like()};
  }
  void set_zero();
};

struct DeformPointCache {
  EncodeCache enc;
  MlpCache mlp;
};

struct DeformCloudCache {
  double t = 0.0;
  std::vector<DeformPointCache> points;
};

DeformOutput deform_query(const DeformModel& m, const Vec3& mu, double t,
                          DeformPointCache* cache = nullptr);

// Backward of one query: upstream grads on (d_mu, d_rot, d_scale) go into the
// model grads; returns d(loss)/d(query position) through the encoder.
Vec3 deform_query_backward(const DeformModel& m, const DeformPointCache& cache,
                           const DeformOutput& dout, ModelGrads& grads);

// Deformed cloud at time t: raw-space addition, opacity and SH pass through.
GaussianCloud deform_cloud(const DeformModel& m, const GaussianCloud& canonical, double t,
                           DeformCloudCache* cache = nullptr);

// Chains gradients on the deformed raw parameters back to the canonical
// parameters (accumulated into g_canonical) and the model.
void deform_cloud_backward(const DeformModel& m, const GaussianCloud& canonical,
                           const DeformCloudCache& cache, const CloudGrads& g_deformed,
                           CloudGrads& g_canonical, ModelGrads& g_model);

void save_deform_model(const DeformModel& m, const std::string& path);
DeformModel load_deform_model(const std::string& path);

}  // namespace dsgs
