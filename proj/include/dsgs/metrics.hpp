#pragma once

#include <vector>

#include "dsgs/image.hpp"
#include "dsgs/mesh.hpp"
#include "dsgs/rng.hpp"
#include "dsgs/types.hpp"

namespace dsgs {

// Symmetric mean non-squared Chamfer distance in raw scene units:
// 0.5 * (mean_a NN(a->b) + mean_b NN(b->a)).
double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Chamfer in the reporting convention (units of 1e-3 scene units).
inline double chamfer_distance_milli(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  return 1e3 * chamfer_distance(a, b);
}

// Chamfer between meshes: area-uniform sampling of n_samples points each.
double mesh_chamfer(const Mesh& a, const Mesh& b, int n_samples, Rng& rng);

// Exact-assignment Earth Mover's Distance (Euclidean cost / N) on equal-size
// sets; inputs larger than max_n are subsampled with the given seeded rng.
double emd(std::vector<Vec3> a, std::vector<Vec3> b, Rng& rng, int max_n = 512);

// Minimum-cost perfect matching on a square cost matrix (Hungarian, O(n^3)).
double solve_assignment(const MatX& cost);

double psnr(const Image3& a, const Image3& b);  // capped at 100 dB when MSE = 0
double ssim(const Image3& a, const Image3& b);  // 11x11 Gaussian window, sigma 1.5

}  // namespace dsgs
