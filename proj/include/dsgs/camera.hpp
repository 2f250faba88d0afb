#pragma once

#include "dsgs/image.hpp"
#include "dsgs/types.hpp"

namespace dsgs {

// Pinhole camera. Internal convention: camera x right, y down, z forward
// (image v grows downward). R_c is the world-from-camera rotation (its
// columns are the camera axes expressed in world coordinates), T_c the
// camera center in world coordinates.
struct CameraView {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  Mat3 R_c = Mat3::Identity();
  Vec3 T_c = Vec3::Zero();
  double time = 0.0;

  Mat3 K() const {
    Mat3 k = Mat3::Identity();
    k(0, 0) = fx; k(1, 1) = fy; k(0, 2) = cx; k(1, 2) = cy;
    return k;
  }

  Vec3 world_to_cam(const Vec3& p) const { return R_c.transpose() * (p - T_c); }
  Vec3 cam_to_world(const Vec3& p) const { return R_c * p + T_c; }

  // K^-1 * (u, v, 1): the un-normalized ray through a pixel, z = 1.
  Vec3 pixel_ray(double u, double v) const {
    return Vec3((u - cx) / fx, (v - cy) / fy, 1.0);
  }

  Vec2 project_cam(const Vec3& pc) const {
    return Vec2(fx * pc.x() / pc.z() + cx, fy * pc.y() / pc.z() + cy);
  }

  void validate() const {
    if (fx <= 0 || fy <= 0) throw DsgsError("camera: fx, fy must be positive");
    if (time < 0.0 || time > 1.0) throw DsgsError("camera: time outside [0,1]");
    Mat3 e = R_c * R_c.transpose() - Mat3::Identity();
    if (e.cwiseAbs().maxCoeff() > 1e-4 || R_c.determinant() < 0.0)
      throw DsgsError("camera: rotation not orthonormal with det +1");
  }
};

struct Frame {
  CameraView view;
  Image3 image;

  void validate() const {
    if (image.width != view.width || image.height != view.height)
      throw DsgsError("frame: image dimensions do not match camera view");
  }
};

// A camera placed at `eye`, forward axis toward `target`, roll fixed by `up`.
CameraView look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                          double fov_x, int width, int height, double time = 0.0);

// fx = 0.5 * width / tan(camera_angle_x / 2)
double focal_from_fov(double camera_angle_x, int width);

}  // namespace dsgs
