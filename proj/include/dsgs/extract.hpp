#pragma once

#include "dsgs/deform_model.hpp"
#include "dsgs/renderer.hpp"
#include "dsgs/tsdf.hpp"

namespace dsgs {

struct MeshExtractOptions {
  int n_views = 26;             // virtual cameras on a bounding sphere
  int volume_resolution = 256;  // voxels per axis; voxel = extent / resolution
  Vec3 center = Vec3::Zero();
  double extent = 2.0;          // cube side length of the fusion volume
  double cam_radius = 3.0;
  double fov_x = 0.8726646259971648;
  int image_size = 128;
  RenderOptions render;

  double voxel_size() const { return extent / volume_resolution; }
};

// Virtual camera centers: the 26 unit offsets of a 3x3x3 cube shell (or a
// seedless azimuth ring when fewer are requested), scaled to `radius`.
std::vector<CameraView> virtual_views(const MeshExtractOptions& opts, double time);

// Deform to time t (clamped to [0,1] with a warning), render unbiased depth
// from every virtual view, fuse into a TSDF, extract, keep the largest
// component. `model` may be null to extract the canonical cloud directly.
Mesh extract_dynamic_mesh(const GaussianCloud& canonical, const DeformModel* model,
                          double t, const MeshExtractOptions& opts);

}  // namespace dsgs
