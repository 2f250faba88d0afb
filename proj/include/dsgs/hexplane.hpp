#pragma once

#include <array>
#include <string>
#include <vector>

#include "dsgs/rng.hpp"
#include "dsgs/types.hpp"

namespace dsgs {

// One 2D feature grid, res_a x res_b nodes with feat_dim channels.
struct PlaneGrid {
  int res_a = 0, res_b = 0, feat_dim = 0;
  std::vector<double> v;

  void init(int ra, int rb, int fd, double fill = 0.0) {
    res_a = ra; res_b = rb; feat_dim = fd;
    v.assign(size_t(ra) * rb * fd, fill);
  }
  double& at(int a, int b, int f) { return v[(size_t(a) * res_b + b) * feat_dim + f]; }
  double at(int a, int b, int f) const { return v[(size_t(a) * res_b + b) * feat_dim + f]; }
};

// Plane order within a scale; spatial first, then spatio-temporal.
enum PlaneIndex { kXY = 0, kXZ, kYZ, kXT, kYT, kZT };

struct HexPlaneScale {
  std::array<PlaneGrid, 6> planes;
};

// Cached interpolation state for one encode call, enough to run backward
// without touching the grids again.
struct EncodeCache {
  struct PlaneSample {
    int ia = 0, ib = 0;       // lower node indices
    double fa = 0, fb = 0;    // fractional coordinates in [0,1]
    // d(frac)/d(world coordinate), zero when clamped at the boundary
    double dfa_dw = 0, dfb_dw = 0;
    int axis_a = 0, axis_b = 0;  // 0..2 spatial, 3 = time
    VecX feat;                   // interpolated feature (feat_dim)
  };
  struct ScaleSample {
    std::array<PlaneSample, 6> planes;
    VecX fused;
  };
  std::vector<ScaleSample> scales;
  bool clamped = false;
};

struct HexPlaneField {
  std::vector<HexPlaneScale> scales;
  std::vector<int> multipliers;
  int feat_dim = 0;
  Vec3 bounds_min = Vec3::Constant(-1.0);
  Vec3 bounds_max = Vec3::Constant(1.0);

  int feature_size() const { return feat_dim * int(scales.size()); }

  // Grids sized per scale: spatial planes (base_spatial*m)^2, temporal planes
  // base_spatial*m x base_time*m. Values init_offset + U(-init_noise, init_noise).
  void init(int base_spatial, int base_time, int fd, const std::vector<int>& mults,
            const Vec3& bmin, const Vec3& bmax, Rng& rng,
            double init_offset = 1.0, double init_noise = 1e-2);

  // Zero-valued copy of this field's shapes, used as a gradient holder.
  HexPlaneField zeros_like() const;

  size_t param_count() const;
};

// Bilinear interpolation on each of the six planes, elementwise product
// within a scale, concatenation across scales. Out-of-bounds queries clamp.
VecX hexplane_encode(const HexPlaneField& field, const Vec3& mu, double t,
                     EncodeCache* cache = nullptr);

// Accumulates grid gradients into `grads` (zeros_like shape) and, if
// requested, the gradient w.r.t. the query position.
void hexplane_encode_backward(const HexPlaneField& field, const EncodeCache& cache,
                              const VecX& dfeat, HexPlaneField& grads, Vec3* dmu = nullptr);

// Mean squared difference of adjacent nodes along both grid axes, summed
// over planes and scales.
double hexplane_tv(const HexPlaneField& field);
void hexplane_tv_backward(const HexPlaneField& field, double dloss, HexPlaneField& grads);

void save_hexplane(const HexPlaneField& f, std::ostream& os);
HexPlaneField load_hexplane(std::istream& is);

}  // namespace dsgs
