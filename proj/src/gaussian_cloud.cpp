#include "dsgs/gaussian_cloud.hpp"

#include <cmath>

namespace dsgs {

Vec4 normalize_quat(const Vec4& q) {
  double n = q.norm();
  if (n < 1e-12) throw DsgsError("degenerate rotation: zero-norm quaternion");
  return q / n;
}

Mat3 quat_to_rot(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

Vec4 rot_backward(const Mat3& dR, const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 dw, dx, dy, dz;
  dw << 0, -2 * z, 2 * y,
        2 * z, 0, -2 * x,
        -2 * y, 2 * x, 0;
  dx << 0, 2 * y, 2 * z,
        2 * y, -4 * x, -2 * w,
        2 * z, 2 * w, -4 * x;
  dy << -4 * y, 2 * x, 2 * w,
        2 * x, 0, 2 * z,
        -2 * w, 2 * z, -4 * y;
  dz << -4 * z, -2 * w, 2 * x,
        2 * w, -4 * z, 2 * y,
        2 * x, 2 * y, 0;
  return Vec4((dR.array() * dw.array()).sum(), (dR.array() * dx.array()).sum(),
              (dR.array() * dy.array()).sum(), (dR.array() * dz.array()).sum());
}

Vec4 quat_normalize_backward(const Vec4& q_raw, const Vec4& d_unit) {
  double n = q_raw.norm();
  Vec4 u = q_raw / n;
  return (d_unit - u * u.dot(d_unit)) / n;
}

Mat3 build_covariance(const Vec4& rot_raw, const Vec3& scale_raw) {
  Vec4 q = normalize_quat(rot_raw);
  Mat3 R = quat_to_rot(q);
  Vec3 s = scale_raw.array().exp();
  Mat3 M = R * s.asDiagonal();
  return M * M.transpose();
}

void build_covariance_backward(const Vec4& rot_raw, const Vec3& scale_raw,
                               const Mat3& dSigma, Vec4& d_rot_raw, Vec3& d_scale_raw) {
  Vec4 q = normalize_quat(rot_raw);
  Mat3 R = quat_to_rot(q);
  Vec3 s = scale_raw.array().exp();
  Mat3 M = R * s.asDiagonal();
  // Sigma = M M^T: dM = (dSigma + dSigma^T) M.
  Mat3 dM = (dSigma + dSigma.transpose()) * M;
  Mat3 dR = dM * s.asDiagonal();
  Mat3 RtdM = R.transpose() * dM;
  for (int k = 0; k < 3; ++k)
    d_scale_raw[k] += RtdM(k, k) * s[k];  // d/d(log s) = d/ds * s
  d_rot_raw += quat_normalize_backward(rot_raw, rot_backward(dR, q));
}

static int smallest_scale_axis(const Vec3& s) {
  double m = s.minCoeff();
  for (int i = 0; i < 3; ++i)
    if (s[i] <= m + 1e-9) return i;
  return 0;
}

Vec3 gaussian_normal_ex(const Vec4& rot_raw, const Vec3& scale_raw, const Vec3& mu,
                        const Vec3& cam_center, int& axis, double& sign) {
  Vec3 s = scale_raw.array().exp();
  axis = smallest_scale_axis(s);
  Mat3 R = quat_to_rot(normalize_quat(rot_raw));
  Vec3 n = R.col(axis);
  sign = (n.dot(mu - cam_center) > 0.0) ? -1.0 : 1.0;
  return sign * n;
}

Vec3 gaussian_normal(const Vec4& rot_raw, const Vec3& scale_raw, const Vec3& mu,
                     const Vec3& cam_center) {
  int axis;
  double sign;
  return gaussian_normal_ex(rot_raw, scale_raw, mu, cam_center, axis, sign);
}

}  // namespace dsgs
