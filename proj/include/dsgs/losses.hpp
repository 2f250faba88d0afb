#pragma once

#include <span>
#include <vector>

#include "dsgs/renderer.hpp"

namespace dsgs {

// Mean absolute difference over all pixels and channels. Optionally
// accumulates d(loss)/d(render) into d_render.
double photometric_loss(const Image3& render, const Image3& gt, Image3* d_render = nullptr);

// Local plane normal per pixel from the four axis neighbors of the unbiased
// depth map; invalid at the border and wherever a neighbor is invalid.
void normal_from_depth(const Image1& depth, const Mask& valid, const CameraView& view,
                       Image3& normals, Mask& out_valid);

enum class NormalWeightMode {
  kProseDownweight,  // (1 - |grad I|)^5: planarity breaks at edges
  kPrinted,          // |grad I|^5 as the formula is written
};

// Depth/normal consistency: per valid pixel, edge weight times the L1 gap
// between the depth-derived normal and the renormalized rendered normal,
// averaged over valid pixels. `image` supplies the edge weights and gets no
// gradient. If `grads` is set, accumulates gradients into the distance and
// normal buffer grads.
double normal_consistency_loss(const RenderBuffers& buffers, const Image3& image,
                               const CameraView& view, NormalWeightMode mode,
                               BufferGrads* grads = nullptr);

struct LambdaSchedule {
  int ramp_start = 7000;
  int ramp_end = 9000;
  double lambda1 = 0.05;
  double lambda2 = 0.02;

  // (0,0) before the ramp, linear across it, constant after.
  std::pair<double, double> at(int iteration) const;
};

struct LossReport {
  int iteration = 0;
  double photo = 0, tv = 0, normal = 0, arap = 0;
  double lambda1 = 0, lambda2 = 0;
  double total = 0;
};

// total = photo + tv + lambda1 * normal + lambda2 * arap. Throws on
// non-finite components.
LossReport total_loss(double photo, double tv, double normal, double arap,
                      const LambdaSchedule& sched, int iteration);

std::string loss_report_json(const LossReport& r);

// --- ARAP ---

struct NeighborGraph {
  int k = 10;
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<double>> weights;   // normalized, sum to 1 per i
  std::vector<std::vector<double>> distances;
};

// Exact kNN on the given positions; weights exp(-d^2 / 2 o_j^2) normalized.
NeighborGraph build_neighbor_graph(const std::vector<Vec3>& positions,
                                   const std::vector<double>& radii, int k = 10);

// Weighted Kabsch: argmin_R sum w_j || a_j - R b_j ||^2 over SO(3).
// All-zero offsets return the identity.
Mat3 estimate_local_rotation(std::span<const Vec3> offsets_t1,
                             std::span<const Vec3> offsets_t2,
                             std::span<const double> weights);

// Mean over sampled Gaussians of the weighted rigidity residual between the
// two deformed position sets. The per-sample rotation is treated as constant
// during backpropagation; position gradients accumulate into g1/g2 if given.
double arap_loss(const std::vector<Vec3>& pos_t1, const std::vector<Vec3>& pos_t2,
                 const NeighborGraph& graph, const std::vector<int>& samples,
                 std::vector<Vec3>* g1 = nullptr, std::vector<Vec3>* g2 = nullptr);

}  // namespace dsgs
