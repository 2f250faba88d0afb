#pragma once

#include "dsgs/camera.hpp"
#include "dsgs/image.hpp"
#include "dsgs/mesh.hpp"

namespace dsgs {

// Truncated signed distance grid; values at grid nodes origin + idx * voxel.
struct TsdfVolume {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> tsdf;     // in [-1, 1], 1 = empty
  std::vector<double> weights;

  TsdfVolume() = default;
  TsdfVolume(const Vec3& origin_, double voxel, int nx_, int ny_, int nz_)
      : origin(origin_), voxel_size(voxel), nx(nx_), ny(ny_), nz(nz_),
        tsdf(size_t(nx_) * ny_ * nz_, 1.0), weights(size_t(nx_) * ny_ * nz_, 0.0) {}

  size_t index(int i, int j, int k) const { return (size_t(i) * ny + j) * nz + k; }
  Vec3 node_pos(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i, j, k);
  }
  double truncation() const { return 4.0 * voxel_size; }
};

// Projective fusion of one depth map: per node, sdf = depth(m) - node_cam_z,
// clipped to the truncation band, fused by a running weighted average.
void tsdf_integrate(TsdfVolume& volume, const Image1& depth, const Mask& valid,
                    const CameraView& view);

// Isosurface triangulation at `iso` with linear interpolation along edges
// (tetrahedral cube decomposition). Nodes with zero weight are skipped.
Mesh extract_isosurface(const TsdfVolume& volume, double iso = 0.0);

}  // namespace dsgs
