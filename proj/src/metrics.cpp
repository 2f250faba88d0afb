#include "dsgs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dsgs/kdtree.hpp"

namespace dsgs {

double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw DsgsError("chamfer: empty point set");
  KdTree ta(a), tb(b);
  double sa = 0.0, sb = 0.0;
  for (const auto& p : a) sa += tb.nearest_distance(p);
  for (const auto& p : b) sb += ta.nearest_distance(p);
  return 0.5 * (sa / double(a.size()) + sb / double(b.size()));
}

double mesh_chamfer(const Mesh& a, const Mesh& b, int n_samples, Rng& rng) {
  return chamfer_distance(sample_mesh_surface(a, n_samples, rng),
                          sample_mesh_surface(b, n_samples, rng));
}

double solve_assignment(const MatX& cost) {
  const int n = int(cost.rows());
  if (cost.cols() != n) throw DsgsError("assignment: cost matrix must be square");
  // Hungarian algorithm with potentials, O(n^3).
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = INF;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    if (p[j]) total += cost(p[j] - 1, j - 1);
  return total;
}

namespace {

std::vector<Vec3> subsample(std::vector<Vec3> pts, size_t n, Rng& rng) {
  if (pts.size() <= n) return pts;
  // Partial Fisher-Yates: first n entries become the sample.
  for (size_t i = 0; i < n; ++i)
    std::swap(pts[i], pts[i + rng.index(int(pts.size() - i))]);
  pts.resize(n);
  return pts;
}

}  // namespace

double emd(std::vector<Vec3> a, std::vector<Vec3> b, Rng& rng, int max_n) {
  if (a.empty() || b.empty()) throw DsgsError("emd: empty point set");
  size_t n = std::min({a.size(), b.size(), size_t(max_n)});
  a = subsample(std::move(a), n, rng);
  b = subsample(std::move(b), n, rng);
  MatX cost(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) cost(i, j) = (a[i] - b[j]).norm();
  return solve_assignment(cost) / double(n);
}

double psnr(const Image3& a, const Image3& b) {
  if (!a.same_shape(b)) throw DsgsError("psnr: shape mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= double(a.data.size());
  if (mse <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image3& a, const Image3& b) {
  if (!a.same_shape(b)) throw DsgsError("ssim: shape mismatch");
  const int W = a.width, H = a.height, R = 5;  // 11x11 window
  if (W < 2 * R + 1 || H < 2 * R + 1) throw DsgsError("ssim: image smaller than window");
  Image1 ga = to_grayscale(a), gb = to_grayscale(b);

  double kernel[11];
  double ksum = 0.0;
  for (int i = -R; i <= R; ++i) {
    kernel[i + R] = std::exp(-double(i * i) / (2.0 * 1.5 * 1.5));
    ksum += kernel[i + R];
  }
  for (double& k : kernel) k /= ksum;

  const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
  double total = 0.0;
  long count = 0;
  for (int y = R; y + R < H; ++y) {
    for (int x = R; x + R < W; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = -R; dy <= R; ++dy) {
        for (int dx = -R; dx <= R; ++dx) {
          double w = kernel[dy + R] * kernel[dx + R];
          double va = ga.at(y + dy, x + dx), vb = gb.at(y + dy, x + dx);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
      double s = ((2 * ma * mb + C1) * (2 * cov + C2)) /
                 ((ma * ma + mb * mb + C1) * (var_a + var_b + C2));
      total += s;
      ++count;
    }
  }
  return total / double(count);
}

}  // namespace dsgs
