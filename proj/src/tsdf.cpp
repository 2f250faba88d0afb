#include "dsgs/tsdf.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dsgs {

void tsdf_integrate(TsdfVolume& vol, const Image1& depth, const Mask& valid,
                    const CameraView& view) {
  const double trunc = vol.truncation();
  for (int i = 0; i < vol.nx; ++i) {
    for (int j = 0; j < vol.ny; ++j) {
      for (int k = 0; k < vol.nz; ++k) {
        Vec3 pc = view.world_to_cam(vol.node_pos(i, j, k));
        if (pc.z() <= 0.0) continue;
        Vec2 px = view.project_cam(pc);
        int u = int(std::floor(px.x())), v = int(std::floor(px.y()));
        if (u < 0 || u >= depth.width || v < 0 || v >= depth.height) continue;
        if (!valid[size_t(v) * depth.width + u]) continue;
        double sdf = depth.at(v, u) - pc.z();
        if (sdf < -trunc) continue;  // behind the observed surface
        double val = std::min(1.0, sdf / trunc);
        size_t idx = vol.index(i, j, k);
        double w = vol.weights[idx];
        vol.tsdf[idx] = (vol.tsdf[idx] * w + val) / (w + 1.0);
        vol.weights[idx] = w + 1.0;
      }
    }
  }
}

namespace {

// Tetrahedral decomposition of each cube around the 0-6 diagonal; face
// diagonals line up between adjacent cubes, so the surface is watertight.
constexpr int kTets[6][4] = {{0, 5, 1, 6}, {0, 1, 2, 6}, {0, 2, 3, 6},
                             {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6}};
// Cube corner offsets, index bit order matching the classic MC layout.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

}  // namespace

Mesh extract_isosurface(const TsdfVolume& vol, double iso) {
  Mesh mesh;
  std::unordered_map<uint64_t, int> edge_vertex;

  auto node_id = [&](int i, int j, int k) -> uint64_t {
    return (uint64_t(i) * (vol.ny + 1) + j) * (vol.nz + 1) + k;
  };

  auto edge_point = [&](uint64_t ida, uint64_t idb, const Vec3& pa, const Vec3& pb,
                        double va, double vb) -> int {
    uint64_t a = std::min(ida, idb), b = std::max(ida, idb);
    uint64_t key = a * 0x100000000ull ^ b;  // node count stays far below 2^32
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    double t = (vb - va) != 0.0 ? (iso - va) / (vb - va) : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    Vec3 p = pa + (pb - pa) * t;  // symmetric in (a,b): same point either direction
    int id = int(mesh.vertices.size());
    mesh.vertices.push_back(p);
    edge_vertex[key] = id;
    return id;
  };

  auto emit = [&](int v0, int v1, int v2, const Vec3& outward) {
    Vec3 n = (mesh.vertices[v1] - mesh.vertices[v0])
                 .cross(mesh.vertices[v2] - mesh.vertices[v0]);
    if (n.dot(outward) < 0.0)
      mesh.triangles.push_back({v0, v2, v1});
    else
      mesh.triangles.push_back({v0, v1, v2});
  };

  for (int i = 0; i + 1 < vol.nx; ++i) {
    for (int j = 0; j + 1 < vol.ny; ++j) {
      for (int k = 0; k + 1 < vol.nz; ++k) {
        double val[8];
        Vec3 pos[8];
        uint64_t ids[8];
        bool observed = true;
        for (int c = 0; c < 8; ++c) {
          int ci = i + kCorner[c][0], cj = j + kCorner[c][1], ck = k + kCorner[c][2];
          size_t idx = vol.index(ci, cj, ck);
          if (vol.weights[idx] <= 0.0) { observed = false; break; }
          val[c] = vol.tsdf[idx];
          pos[c] = vol.node_pos(ci, cj, ck);
          ids[c] = node_id(ci, cj, ck);
        }
        if (!observed) continue;

        for (const auto& tet : kTets) {
          int inside[4], outside[4];
          int ni = 0, no = 0;
          for (int c = 0; c < 4; ++c) {
            if (val[tet[c]] < iso) inside[ni++] = tet[c];
            else outside[no++] = tet[c];
          }
          if (ni == 0 || ni == 4) continue;

          Vec3 cin = Vec3::Zero(), cout = Vec3::Zero();
          for (int c = 0; c < ni; ++c) cin += pos[inside[c]];
          for (int c = 0; c < no; ++c) cout += pos[outside[c]];
          Vec3 outward = cout / no - cin / ni;

          auto ep = [&](int a, int b) {
            return edge_point(ids[a], ids[b], pos[a], pos[b], val[a], val[b]);
          };
          if (ni == 1) {
            emit(ep(inside[0], outside[0]), ep(inside[0], outside[1]),
                 ep(inside[0], outside[2]), outward);
          } else if (ni == 3) {
            emit(ep(inside[0], outside[0]), ep(inside[1], outside[0]),
                 ep(inside[2], outside[0]), outward);
          } else {  // ni == 2: quad split into two triangles
            int a = ep(inside[0], outside[0]);
            int b = ep(inside[0], outside[1]);
            int c = ep(inside[1], outside[1]);
            int d = ep(inside[1], outside[0]);
            emit(a, b, c, outward);
            emit(a, c, d, outward);
          }
        }
      }
    }
  }
  return mesh;
}

}  // namespace dsgs
