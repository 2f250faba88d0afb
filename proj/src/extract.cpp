#include "dsgs/extract.hpp"

#include <cmath>
#include <cstdio>

namespace dsgs {

std::vector<CameraView> virtual_views(const MeshExtractOptions& opts, double time) {
  std::vector<Vec3> dirs;
  if (opts.n_views == 26) {
    for (int x = -1; x <= 1; ++x)
      for (int y = -1; y <= 1; ++y)
        for (int z = -1; z <= 1; ++z) {
          if (x == 0 && y == 0 && z == 0) continue;
          dirs.push_back(Vec3(x, y, z).normalized());
        }
  } else {
    // azimuth ring with two elevation bands
    for (int i = 0; i < opts.n_views; ++i) {
      double az = 2.0 * M_PI * i / opts.n_views;
      double el = (i % 2 == 0) ? 0.5 : -0.5;
      dirs.push_back(Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                          std::sin(el)));
    }
  }
  std::vector<CameraView> views;
  for (const auto& d : dirs) {
    Vec3 eye = opts.center + opts.cam_radius * d;
    Vec3 up = std::abs(d.z()) > 0.99 ? Vec3(0, 1, 0) : Vec3(0, 0, 1);
    views.push_back(look_at_camera(eye, opts.center, up, opts.fov_x, opts.image_size,
                                   opts.image_size, time));
  }
  return views;
}

Mesh extract_dynamic_mesh(const GaussianCloud& canonical, const DeformModel* model,
                          double t, const MeshExtractOptions& opts) {
  double tc = std::clamp(t, 0.0, 1.0);
  if (tc != t)
    std::fprintf(stderr, "warning: extraction time %g clamped to %g\n", t, tc);

  GaussianCloud cloud = model ? deform_cloud(*model, canonical, tc) : canonical;

  int nodes = opts.volume_resolution + 1;
  TsdfVolume vol(opts.center - Vec3::Constant(0.5 * opts.extent), opts.voxel_size(),
                 nodes, nodes, nodes);

  for (const auto& view : virtual_views(opts, tc)) {
    RenderBuffers buf = rasterize(cloud, view, opts.render);
    tsdf_integrate(vol, buf.depth, buf.depth_valid, view);
  }

  Mesh mesh = extract_isosurface(vol);
  if (mesh.empty()) {
    std::fprintf(stderr, "warning: empty isosurface extraction at t=%g\n", tc);
    return mesh;
  }
  return largest_component(mesh);
}

}  // namespace dsgs
