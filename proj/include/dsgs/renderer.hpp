#pragma once

#include <optional>
#include <vector>

#include "dsgs/camera.hpp"
#include "dsgs/gaussian_cloud.hpp"
#include "dsgs/image.hpp"

namespace dsgs {

struct RenderOptions {
  Vec3 background = Vec3(1, 1, 1);
  double near_plane = 0.01;
  double dilation = 0.3;        // screen-covariance low-pass (+0.3 I)
  double alpha_clamp = 0.99;
  double alpha_cutoff = 1.0 / 255.0;
  double transmittance_eps = 1e-4;
  double depth_acc_threshold = 0.5;
  int tile_size = 16;
  // Disables dilation, clamps, cutoffs and extent culling so analytic
  // examples and finite-difference checks are exact.
  bool test_mode = false;

  RenderOptions with_test_mode() const {
    RenderOptions o = *this;
    o.test_mode = true;
    return o;
  }
};

struct ProjectedGaussian {
  int idx = -1;            // index into the source cloud
  Vec3 mu_cam = Vec3::Zero();
  Vec2 center_px = Vec2::Zero();
  Mat2 cov2d = Mat2::Zero();   // undilated J W Sigma W^T J^T
  Mat2 conic = Mat2::Zero();   // inverse of the (dilated) screen covariance
  double z = 0;                // depth sort key
  double opacity = 0;          // activated sigma
  Vec3 color = Vec3::Zero();   // SH evaluated along the view direction
  Vec3 normal_world = Vec3::Zero();
  Vec3 normal_cam = Vec3::Zero();
  int normal_axis = 0;
  double normal_sign = 1.0;
  double plane_dist = 0;       // l_i = (mu - T_c) . n
  double radius_px = 0;        // 3-sigma screen extent
  Vec3 view_dir = Vec3::Zero();
  double view_dist = 0;
};

struct RenderBuffers {
  int width = 0, height = 0;
  Image3 color, normal;
  Image1 distance, depth, acc;
  Mask depth_valid;
  std::vector<double> final_T;
  std::vector<int> n_contrib;  // tile-list entries consumed per pixel
};

struct RenderCache {
  std::vector<ProjectedGaussian> pg;
  std::vector<std::vector<int>> tile_lists;  // per tile, indices into pg, depth-sorted
  int tiles_x = 0, tiles_y = 0;
  CameraView view;
  RenderOptions opts;
};

struct BufferGrads {
  Image3 d_color, d_normal;
  Image1 d_distance, d_acc;

  void resize(int w, int h) {
    d_color = Image3(w, h);
    d_normal = Image3(w, h);
    d_distance = Image1(w, h);
    d_acc = Image1(w, h);
  }
};

struct DensifyStats {
  std::vector<double> grad2d_accum;  // sum of view-space positional grad norms
  std::vector<int> observations;

  void resize(int n) {
    grad2d_accum.assign(n, 0.0);
    observations.assign(n, 0);
  }
};

// Camera transform + local affine projection of one Gaussian. Returns
// nullopt when culled (behind the near plane or fully off-screen).
std::optional<ProjectedGaussian> project_gaussian(const GaussianCloud& cloud, int i,
                                                  const CameraView& view,
                                                  const RenderOptions& opts);

// alpha = sigma * exp(-1/2 d^T conic d) at a pixel, with the clamp policy.
double alpha_at(const ProjectedGaussian& pg, const Vec2& pixel, const RenderOptions& opts);

RenderBuffers rasterize(const GaussianCloud& cloud, const CameraView& view,
                        const RenderOptions& opts, RenderCache* cache = nullptr);

// Fills buffers.depth / depth_valid from the distance and normal buffers.
void compute_unbiased_depth(RenderBuffers& buffers, const CameraView& view,
                            const RenderOptions& opts);

// Reverse-mode gradients of any scalar of (color, normal, distance, acc)
// w.r.t. all raw Gaussian parameters. Replays blending per pixel.
void rasterize_backward(const GaussianCloud& cloud, const RenderCache& cache,
                        const RenderBuffers& buffers, const BufferGrads& upstream,
                        CloudGrads& grads, DensifyStats* stats = nullptr);

}  // namespace dsgs
