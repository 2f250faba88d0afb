#include "dsgs/camera.hpp"

#include <cmath>

namespace dsgs {

double focal_from_fov(double camera_angle_x, int width) {
  return 0.5 * width / std::tan(0.5 * camera_angle_x);
}

CameraView look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                          double fov_x, int width, int height, double time) {
  Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Vec3(1, 0, 0));
  right.normalize();
  Vec3 down = forward.cross(right).normalized();

  CameraView v;
  v.width = width;
  v.height = height;
  v.fx = v.fy = focal_from_fov(fov_x, width);
  v.cx = 0.5 * width;
  v.cy = 0.5 * height;
  v.R_c.col(0) = right;
  v.R_c.col(1) = down;
  v.R_c.col(2) = forward;
  v.T_c = eye;
  v.time = time;
  return v;
}

}  // namespace dsgs
