#pragma once

#include <array>
#include <string>
#include <vector>

#include "dsgs/rng.hpp"
#include "dsgs/types.hpp"

namespace dsgs {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  double surface_area() const;
  void validate() const;  // indices in range, no NaN vertices
};

// Area-uniform surface sampling.
std::vector<Vec3> sample_mesh_surface(const Mesh& mesh, int n_points, Rng& rng);

// Largest vertex-connected component (by triangle count).
Mesh largest_component(const Mesh& mesh);

void save_mesh_ply(const Mesh& mesh, const std::string& path);
void save_mesh_obj(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);  // .ply (binary LE) or .obj

// Icosphere of the given radius; `subdivisions` refinement levels.
Mesh make_icosphere(const Vec3& center, double radius, int subdivisions);
Mesh make_box(const Vec3& center, const Vec3& half_extent);

}  // namespace dsgs
