#pragma once

#include <vector>

#include "dsgs/camera.hpp"
#include "dsgs/sh.hpp"
#include "dsgs/types.hpp"

namespace dsgs {

// The optimizable Gaussian set, stored struct-of-arrays in raw parameter
// space: position, unnormalized quaternion (w,x,y,z), log-scale, opacity
// logit, and SH color coefficients (n_coeffs triples per Gaussian).
struct GaussianCloud {
  int sh_degree = 1;
  std::vector<Vec3> pos;
  std::vector<Vec4> rot_raw;
  std::vector<Vec3> log_scale;
  std::vector<double> opacity_raw;
  std::vector<double> sh;

  int size() const { return int(pos.size()); }
  int sh_coeffs() const { return sh_num_coeffs(sh_degree); }
  int sh_dim() const { return 3 * sh_coeffs(); }

  double* sh_ptr(int i) { return sh.data() + size_t(i) * sh_dim(); }
  const double* sh_ptr(int i) const { return sh.data() + size_t(i) * sh_dim(); }

  void resize(int n) {
    pos.resize(n, Vec3::Zero());
    rot_raw.resize(n, Vec4(1, 0, 0, 0));
    log_scale.resize(n, Vec3::Zero());
    opacity_raw.resize(n, 0.0);
    sh.resize(size_t(n) * sh_dim(), 0.0);
  }

  Vec3 activated_scale(int i) const { return log_scale[i].array().exp(); }
  double activated_opacity(int i) const { return sigmoid(opacity_raw[i]); }
};

// Gradient accumulators with the same shapes as a cloud.
struct CloudGrads {
  std::vector<Vec3> pos;
  std::vector<Vec4> rot_raw;
  std::vector<Vec3> log_scale;
  std::vector<double> opacity_raw;
  std::vector<double> sh;

  void resize_like(const GaussianCloud& c) {
    pos.assign(c.size(), Vec3::Zero());
    rot_raw.assign(c.size(), Vec4::Zero());
    log_scale.assign(c.size(), Vec3::Zero());
    opacity_raw.assign(c.size(), 0.0);
    sh.assign(c.sh.size(), 0.0);
  }
  void set_zero() {
    std::fill(pos.begin(), pos.end(), Vec3::Zero());
    std::fill(rot_raw.begin(), rot_raw.end(), Vec4::Zero());
    std::fill(log_scale.begin(), log_scale.end(), Vec3::Zero());
    std::fill(opacity_raw.begin(), opacity_raw.end(), 0.0);
    std::fill(sh.begin(), sh.end(), 0.0);
  }
  double* sh_ptr(int i, int sh_dim) { return sh.data() + size_t(i) * sh_dim; }
};

// Rotation matrix of the normalized quaternion (w,x,y,z).
Mat3 quat_to_rot(const Vec4& q_unit);
Vec4 normalize_quat(const Vec4& q_raw);  // throws on near-zero norm

// Given d(loss)/dR at a unit quaternion, d(loss)/d(unit quaternion).
Vec4 rot_backward(const Mat3& dR, const Vec4& q_unit);
// Chain a unit-quaternion gradient back through normalization.
Vec4 quat_normalize_backward(const Vec4& q_raw, const Vec4& d_unit);

// Sigma = R * diag(s)^2 * R^T with q normalized, s = exp(scale_raw).
Mat3 build_covariance(const Vec4& rot_raw, const Vec3& scale_raw);
// Accumulates gradients of a loss with symmetric dSigma.
void build_covariance_backward(const Vec4& rot_raw, const Vec3& scale_raw,
                               const Mat3& dSigma, Vec4& d_rot_raw, Vec3& d_scale_raw);

// Unit normal along the rotated axis of the smallest activated scale,
// sign-flipped so n . (mu - cam_center) <= 0. Near-ties (1e-9) resolve to
// the lowest axis index.
Vec3 gaussian_normal(const Vec4& rot_raw, const Vec3& scale_raw, const Vec3& mu,
                     const Vec3& cam_center);
// Same computation, also reporting the chosen axis and sign for backward.
Vec3 gaussian_normal_ex(const Vec4& rot_raw, const Vec3& scale_raw, const Vec3& mu,
                        const Vec3& cam_center, int& axis, double& sign);

}  // namespace dsgs
