#include "dsgs/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dsgs {

double photometric_loss(const Image3& render, const Image3& gt, Image3* d_render) {
  if (!render.same_shape(gt)) throw DsgsError("photometric: image shape mismatch");
  const size_t n = render.data.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += std::abs(render.data[i] - gt.data[i]);
  if (d_render) {
    for (size_t i = 0; i < n; ++i) {
      double d = render.data[i] - gt.data[i];
      d_render->data[i] += (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / double(n);
    }
  }
  return sum / double(n);
}

void normal_from_depth(const Image1& depth, const Mask& valid, const CameraView& view,
                       Image3& normals, Mask& out_valid) {
  const int W = depth.width, H = depth.height;
  normals = Image3(W, H);
  out_valid.assign(size_t(W) * H, 0);
  auto ok = [&](int y, int x) { return valid[size_t(y) * W + x] != 0; };
  for (int y = 1; y + 1 < H; ++y) {
    for (int x = 1; x + 1 < W; ++x) {
      if (!ok(y, x) || !ok(y, x - 1) || !ok(y, x + 1) || !ok(y - 1, x) || !ok(y + 1, x))
        continue;
      Vec3 M0 = depth.at(y, x - 1) * view.pixel_ray(x - 0.5, y + 0.5);
      Vec3 M1 = depth.at(y, x + 1) * view.pixel_ray(x + 1.5, y + 0.5);
      Vec3 M2 = depth.at(y - 1, x) * view.pixel_ray(x + 0.5, y - 0.5);
      Vec3 M3 = depth.at(y + 1, x) * view.pixel_ray(x + 0.5, y + 1.5);
      Vec3 v = (M1 - M0).cross(M3 - M2);
      double n = v.norm();
      if (n < 1e-12) continue;
      Vec3 nl = v / n;
      if (nl.dot(view.pixel_ray(x + 0.5, y + 0.5)) > 0.0) nl = -nl;
      normals.set_pixel(y, x, nl);
      out_valid[size_t(y) * W + x] = 1;
    }
  }
}

namespace {

// Per-image-normalized gradient magnitude of the grayscale image.
Image1 edge_magnitude(const Image3& image) {
  Image1 gray = to_grayscale(image);
  Image1 mag(gray.width, gray.height, 0.0);
  double mx = 0.0;
  for (int y = 1; y + 1 < gray.height; ++y)
    for (int x = 1; x + 1 < gray.width; ++x) {
      double gx = 0.5 * (gray.at(y, x + 1) - gray.at(y, x - 1));
      double gy = 0.5 * (gray.at(y + 1, x) - gray.at(y - 1, x));
      double m = std::hypot(gx, gy);
      mag.at(y, x) = m;
      mx = std::max(mx, m);
    }
  if (mx > 0.0)
    for (double& v : mag.data) v /= mx;
  return mag;
}

inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

double normal_consistency_loss(const RenderBuffers& buf, const Image3& image,
                               const CameraView& view, NormalWeightMode mode,
                               BufferGrads* grads) {
  const int W = buf.width, H = buf.height;
  Image1 edges = edge_magnitude(image);

  Image3 nl_map;
  Mask nl_valid;
  normal_from_depth(buf.depth, buf.depth_valid, view, nl_map, nl_valid);

  // First pass: count valid pixels so the backward pass can use the mean.
  struct Pix { int x, y; };
  std::vector<Pix> valid_px;
  for (int y = 1; y + 1 < H; ++y)
    for (int x = 1; x + 1 < W; ++x)
      if (nl_valid[size_t(y) * W + x] && buf.normal.pixel(y, x).norm() >= 1e-9)
        valid_px.push_back({x, y});
  if (valid_px.empty()) return 0.0;
  const double inv_count = 1.0 / double(valid_px.size());

  double loss = 0.0;
  for (const auto& p : valid_px) {
    const int x = p.x, y = p.y;
    double e = edges.at(y, x);
    double w = (mode == NormalWeightMode::kPrinted) ? std::pow(e, 5.0)
                                                    : std::pow(1.0 - e, 5.0);
    Vec3 N = buf.normal.pixel(y, x);
    double Nn = N.norm();
    Vec3 nhat = N / Nn;
    Vec3 nl = nl_map.pixel(y, x);
    Vec3 diff = nl - nhat;
    loss += w * diff.cwiseAbs().sum() * inv_count;

    if (!grads) continue;

    Vec3 s(sgn(diff[0]), sgn(diff[1]), sgn(diff[2]));
    // rendered-normal side
    Vec3 dnhat = -w * inv_count * s;
    Vec3 dN = (Mat3::Identity() - nhat * nhat.transpose()) * dnhat / Nn;
    for (int c = 0; c < 3; ++c) grads->d_normal.at(y, x, c) += dN[c];

    // depth-derived side: redo the local computation to get the chain
    Vec3 M0 = buf.depth.at(y, x - 1) * view.pixel_ray(x - 0.5, y + 0.5);
    Vec3 M1 = buf.depth.at(y, x + 1) * view.pixel_ray(x + 1.5, y + 0.5);
    Vec3 M2 = buf.depth.at(y - 1, x) * view.pixel_ray(x + 0.5, y - 0.5);
    Vec3 M3 = buf.depth.at(y + 1, x) * view.pixel_ray(x + 0.5, y + 1.5);
    Vec3 a = M1 - M0, b = M3 - M2;
    Vec3 v = a.cross(b);
    double vn = v.norm();
    Vec3 u = v / vn;
    double rho = (u.dot(view.pixel_ray(x + 0.5, y + 0.5)) > 0.0) ? -1.0 : 1.0;

    Vec3 dnl = w * inv_count * s;
    Vec3 dv = rho * (Mat3::Identity() - u * u.transpose()) * dnl / vn;
    Vec3 da = b.cross(dv);
    Vec3 db = dv.cross(a);

    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    const Vec3 dM[4] = {-da, da, -db, db};
    for (int j = 0; j < 4; ++j) {
      Vec3 ray = view.pixel_ray(nx[j] + 0.5, ny[j] + 0.5);
      double ddepth = ray.dot(dM[j]);
      double denom = buf.normal.pixel(ny[j], nx[j]).dot(ray);
      grads->d_distance.at(ny[j], nx[j]) += ddepth / denom;
      Vec3 dNj = ddepth * (-buf.distance.at(ny[j], nx[j]) / (denom * denom)) * ray;
      for (int c = 0; c < 3; ++c) grads->d_normal.at(ny[j], nx[j], c) += dNj[c];
    }
  }
  return loss;
}

std::pair<double, double> LambdaSchedule::at(int iteration) const {
  if (iteration <= ramp_start) return {0.0, 0.0};
  if (iteration >= ramp_end) return {lambda1, lambda2};
  double f = double(iteration - ramp_start) / double(ramp_end - ramp_start);
  return {f * lambda1, f * lambda2};
}

LossReport total_loss(double photo, double tv, double normal, double arap,
                      const LambdaSchedule& sched, int iteration) {
  LossReport r;
  r.iteration = iteration;
  r.photo = photo;
  r.tv = tv;
  r.normal = normal;
  r.arap = arap;
  std::tie(r.lambda1, r.lambda2) = sched.at(iteration);
  r.total = photo + tv + r.lambda1 * normal + r.lambda2 * arap;
  if (!std::isfinite(r.total))
    throw DsgsError("non-finite loss at iteration " + std::to_string(iteration) +
                    ": photo=" + std::to_string(photo) + " tv=" + std::to_string(tv) +
                    " normal=" + std::to_string(normal) + " arap=" + std::to_string(arap));
  return r;
}

std::string loss_report_json(const LossReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\"iter\":%d,\"photo\":%.17g,\"tv\":%.17g,\"normal\":%.17g,"
                "\"arap\":%.17g,\"lambda1\":%.17g,\"lambda2\":%.17g,\"total\":%.17g}",
                r.iteration, r.photo, r.tv, r.normal, r.arap, r.lambda1, r.lambda2, r.total);
  return buf;
}

NeighborGraph build_neighbor_graph(const std::vector<Vec3>& positions,
                                   const std::vector<double>& radii, int k) {
  const int n = int(positions.size());
  if (n < k + 1) throw DsgsError("neighbor graph: need at least k+1 points");
  NeighborGraph g;
  g.k = k;
  g.neighbors.resize(n);
  g.weights.resize(n);
  g.distances.resize(n);

  // Brute force; fine for desk-scale clouds (well under 20k points).
  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((positions[j] - positions[i]).squaredNorm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    double wsum = 0.0;
    g.neighbors[i].resize(k);
    g.weights[i].resize(k);
    g.distances[i].resize(k);
    for (int m = 0; m < k; ++m) {
      int j = cand[m].second;
      double d2 = cand[m].first;
      double oj = std::max(radii[j], 1e-12);
      g.neighbors[i][m] = j;
      g.distances[i][m] = std::sqrt(d2);
      g.weights[i][m] = std::exp(-d2 / (2.0 * oj * oj));
      wsum += g.weights[i][m];
    }
    if (wsum < 1e-300) {
      for (double& w : g.weights[i]) w = 1.0 / k;
    } else {
      for (double& w : g.weights[i]) w /= wsum;
    }
  }
  return g;
}

Mat3 estimate_local_rotation(std::span<const Vec3> a, std::span<const Vec3> b,
                             std::span<const double> w) {
  if (a.size() != b.size() || a.size() != w.size())
    throw DsgsError("estimate_local_rotation: length mismatch");
  Mat3 H = Mat3::Zero();
  for (size_t j = 0; j < a.size(); ++j) H += w[j] * b[j] * a[j].transpose();
  if (H.norm() < 1e-300) return Mat3::Identity();
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU(), V = svd.matrixV();
  Vec3 d(1, 1, (V * U.transpose()).determinant());
  return V * d.asDiagonal() * U.transpose();
}

double arap_loss(const std::vector<Vec3>& p1, const std::vector<Vec3>& p2,
                 const NeighborGraph& graph, const std::vector<int>& samples,
                 std::vector<Vec3>* g1, std::vector<Vec3>* g2) {
  if (samples.empty()) return 0.0;
  const double inv_n = 1.0 / double(samples.size());
  double total = 0.0;
  std::vector<Vec3> o1, o2;
  for (int i : samples) {
    const auto& nbrs = graph.neighbors[i];
    const auto& w = graph.weights[i];
    o1.clear(); o2.clear();
    for (int j : nbrs) {
      o1.push_back(p1[i] - p1[j]);
      o2.push_back(p2[i] - p2[j]);
    }
    Mat3 R = estimate_local_rotation(o1, o2, w);
    for (size_t m = 0; m < nbrs.size(); ++m) {
      Vec3 r = o1[m] - R * o2[m];
      total += w[m] * r.squaredNorm() * inv_n;
      if (g1 || g2) {
        int j = nbrs[m];
        if (g1) {
          Vec3 d = 2.0 * w[m] * r * inv_n;
          (*g1)[i] += d;
          (*g1)[j] -= d;
        }
        if (g2) {
          Vec3 d = -2.0 * w[m] * (R.transpose() * r) * inv_n;
          (*g2)[i] += d;
          (*g2)[j] -= d;
        }
      }
    }
  }
  return total;
}

}  // namespace dsgs
