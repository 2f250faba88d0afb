#include "dsgs/deform_model.hpp"

#include <fstream>

namespace dsgs {

DeformModel DeformModel::make(int base_spatial, int base_time, int feat_dim,
                              const std::vector<int>& multipliers, int width, int depth,
                              const Vec3& bmin, const Vec3& bmax, Rng& rng,
                              double grid_offset) {
  DeformModel m;
  m.field.init(base_spatial, base_time, feat_dim, multipliers, bmin, bmax, rng, grid_offset);
  m.decoder = Mlp::make(m.field.feature_size(), width, depth, 10, rng, /*zero_output=*/true);
  return m;
}

void ModelGrads::set_zero() {
  for (auto& sc : field.scales)
    for (auto& p : sc.planes) std::fill(p.v.begin(), p.v.end(), 0.0);
  for (auto& w : decoder.W) w.setZero();
  for (auto& b : decoder.b) b.setZero();
}

DeformOutput deform_query(const DeformModel& m, const Vec3& mu, double t,
                          DeformPointCache* cache) {
  VecX feat = hexplane_encode(m.field, mu, t, cache ? &cache->enc : nullptr);
  VecX out = m.decoder.forward(feat, cache ? &cache->mlp : nullptr);
  DeformOutput d;
  d.d_mu = out.segment<3>(0);
  d.d_rot = out.segment<4>(3);
  d.d_scale = out.segment<3>(7);
  return d;
}

Vec3 deform_query_backward(const DeformModel& m, const DeformPointCache& cache,
                           const DeformOutput& dout, ModelGrads& grads) {
  VecX dy(10);
  dy.segment<3>(0) = dout.d_mu;
  dy.segment<4>(3) = dout.d_rot;
  dy.segment<3>(7) = dout.d_scale;
  VecX dfeat = m.decoder.backward(cache.mlp, dy, grads.decoder);
  Vec3 dmu = Vec3::Zero();
  hexplane_encode_backward(m.field, cache.enc, dfeat, grads.field, &dmu);
  return dmu;
}

GaussianCloud deform_cloud(const DeformModel& m, const GaussianCloud& canonical, double t,
                           DeformCloudCache* cache) {
  GaussianCloud out = canonical;
  if (cache) {
    cache->t = t;
    cache->points.resize(canonical.size());
  }
  for (int i = 0; i < canonical.size(); ++i) {
    DeformOutput d = deform_query(m, canonical.pos[i], t, cache ? &cache->points[i] : nullptr);
    out.pos[i] += d.d_mu;
    out.rot_raw[i] += d.d_rot;
    out.log_scale[i] += d.d_scale;
  }
  return out;
}

void deform_cloud_backward(const DeformModel& m, const GaussianCloud& canonical,
                           const DeformCloudCache& cache, const CloudGrads& g_deformed,
                           CloudGrads& g_canonical, ModelGrads& g_model) {
  const int sh_dim = canonical.sh_dim();
  for (int i = 0; i < canonical.size(); ++i) {
    DeformOutput dout;
    dout.d_mu = g_deformed.pos[i];
    dout.d_rot = g_deformed.rot_raw[i];
    dout.d_scale = g_deformed.log_scale[i];
    Vec3 dmu_enc = deform_query_backward(m, cache.points[i], dout, g_model);
    g_canonical.pos[i] += g_deformed.pos[i] + dmu_enc;
    g_canonical.rot_raw[i] += g_deformed.rot_raw[i];
    g_canonical.log_scale[i] += g_deformed.log_scale[i];
    g_canonical.opacity_raw[i] += g_deformed.opacity_raw[i];
    for (int c = 0; c < sh_dim; ++c)
      g_canonical.sh[size_t(i) * sh_dim + c] += g_deformed.sh[size_t(i) * sh_dim + c];
  }
}

void save_deform_model(const DeformModel& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DsgsError("cannot write field checkpoint: " + path);
  save_hexplane(m.field, os);
  save_mlp(m.decoder, os);
}

DeformModel load_deform_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DsgsError("cannot open field checkpoint: " + path);
  DeformModel m;
  m.field = load_hexplane(is);
  m.decoder = load_mlp(is);
  return m;
}

}  // namespace dsgs
