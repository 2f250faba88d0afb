#include "doctest.h"

#include <cmath>
#include <numeric>

#include "dsgs/losses.hpp"
#include "dsgs/rng.hpp"

using namespace dsgs;

namespace {

Mat3 random_rotation(Rng& rng) {
  Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  while (q.norm() < 1e-6) q = Vec4(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return quat_to_rot(normalize_quat(q));
}

double kabsch_cost(std::span<const Vec3> a, std::span<const Vec3> b,
                   std::span<const double> w, const Mat3& R) {
  double c = 0.0;
  for (size_t j = 0; j < a.size(); ++j) c += w[j] * (a[j] - R * b[j]).squaredNorm();
  return c;
}

std::vector<Vec3> random_points(Rng& rng, int n, double spread = 1.0) {
  std::vector<Vec3> p(n);
  for (auto& v : p)
    v = Vec3(rng.uniform(-spread, spread), rng.uniform(-spread, spread),
             rng.uniform(-spread, spread));
  return p;
}

}  // namespace

TEST_CASE("neighbor graph weights for a frozen three-point configuration") {
  // p1 at distance 1, p2 at distance 2 from p0, unit radii:
  // w = exp(-1/2), exp(-4/2) normalized.
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0)};
  std::vector<double> radii = {1.0, 1.0, 1.0};
  NeighborGraph g = build_neighbor_graph(pts, radii, 2);
  REQUIRE(g.neighbors[0].size() == 2);
  CHECK(g.neighbors[0][0] == 1);
  CHECK(g.neighbors[0][1] == 2);
  CHECK(g.distances[0][0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.distances[0][1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g.weights[0][0] == doctest::Approx(0.8175744761936437).epsilon(1e-14));
  CHECK(g.weights[0][1] == doctest::Approx(0.18242552380635635).epsilon(1e-14));
}

TEST_CASE("neighbor graph weights normalize and respect neighbor radii") {
  Rng rng(19);
  std::vector<Vec3> pts = random_points(rng, 30);
  std::vector<double> radii(30, 0.5);
  NeighborGraph g = build_neighbor_graph(pts, radii, 10);
  for (int i = 0; i < 30; ++i) {
    REQUIRE(g.neighbors[i].size() == 10);
    double s = std::accumulate(g.weights[i].begin(), g.weights[i].end(), 0.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    // neighbors are sorted by distance
    for (size_t m = 1; m < g.distances[i].size(); ++m)
      CHECK(g.distances[i][m] >= g.distances[i][m - 1]);
    for (int j : g.neighbors[i]) CHECK(j != i);
  }

  // a wider neighbor pulls more weight at the same distance
  std::vector<Vec3> tri = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(-1, 0, 0)};
  std::vector<double> r1 = {1.0, 1.0, 1.0}, r2 = {1.0, 3.0, 1.0};
  NeighborGraph a = build_neighbor_graph(tri, r1, 2);
  NeighborGraph b = build_neighbor_graph(tri, r2, 2);
  CHECK(a.weights[0][0] == doctest::Approx(0.5));
  CHECK(b.weights[0][0] > 0.5);  // neighbor 1 got wider
}

TEST_CASE("neighbor graph needs at least k+1 points") {
  std::vector<Vec3> pts = {Vec3::Zero(), Vec3(1, 0, 0)};
  std::vector<double> radii = {1, 1};
  CHECK_THROWS_AS(build_neighbor_graph(pts, radii, 10), DsgsError);
}

TEST_CASE("weighted kabsch recovers an exact rotation") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Mat3 R = random_rotation(rng);
    std::vector<Vec3> b = random_points(rng, 6);
    std::vector<Vec3> a(6);
    for (int j = 0; j < 6; ++j) a[j] = R * b[j];
    std::vector<double> w(6);
    for (double& x : w) x = rng.uniform(0.1, 1.0);
    Mat3 est = estimate_local_rotation(a, b, w);
    CHECK((est - R).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(est.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("weighted kabsch is the minimizer among random perturbations") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> a = random_points(rng, 8);
    std::vector<Vec3> b = random_points(rng, 8);
    std::vector<double> w(8);
    for (double& x : w) x = rng.uniform(0.1, 1.0);
    Mat3 est = estimate_local_rotation(a, b, w);
    CHECK(est.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    double c0 = kabsch_cost(a, b, w, est);
    for (int p = 0; p < 20; ++p) {
      Mat3 other = est * random_rotation(rng);
      CHECK(c0 <= kabsch_cost(a, b, w, other) + 1e-10);
    }
  }
}

TEST_CASE("kabsch degenerate inputs return the identity") {
  std::vector<Vec3> z(4, Vec3::Zero());
  std::vector<double> w(4, 0.25);
  Mat3 R = estimate_local_rotation(z, z, w);
  CHECK((R - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
  std::vector<Vec3> three(3, Vec3::Zero());
  CHECK_THROWS_AS(estimate_local_rotation(z, three, w), DsgsError);
}

TEST_CASE("arap loss is zero under rigid motion and positive otherwise") {
  Rng rng(31);
  std::vector<Vec3> p1 = random_points(rng, 40);
  std::vector<double> radii(40, 0.3);
  NeighborGraph g = build_neighbor_graph(p1, radii, 10);
  std::vector<int> samples(40);
  std::iota(samples.begin(), samples.end(), 0);

  Mat3 R = random_rotation(rng);
  Vec3 t(0.3, -1.2, 0.7);
  std::vector<Vec3> rigid(40);
  for (int i = 0; i < 40; ++i) rigid[i] = R * p1[i] + t;
  CHECK(arap_loss(p1, rigid, g, samples) < 1e-20);

  std::vector<Vec3> bent = rigid;
  for (int i = 0; i < 40; ++i) bent[i].x() += 0.2 * std::sin(3.0 * p1[i].y());
  CHECK(arap_loss(p1, bent, g, samples) > 1e-6);

  // identity motion is exactly rigid too
  CHECK(arap_loss(p1, p1, g, samples) < 1e-24);
}

TEST_CASE("arap loss is invariant to a global rigid motion of either frame") {
  Rng rng(37);
  std::vector<Vec3> p1 = random_points(rng, 30);
  std::vector<Vec3> p2 = p1;
  for (int i = 0; i < 30; ++i) p2[i] += Vec3(0.1 * std::sin(2 * p1[i].z()), 0, 0);
  std::vector<double> radii(30, 0.3);
  NeighborGraph g = build_neighbor_graph(p1, radii, 10);
  std::vector<int> samples = {0, 3, 7, 12, 20, 29};

  double base = arap_loss(p1, p2, g, samples);
  Mat3 R = random_rotation(rng);
  std::vector<Vec3> moved(30);
  for (int i = 0; i < 30; ++i) moved[i] = R * p2[i] + Vec3(5, -2, 1);
  CHECK(arap_loss(p1, moved, g, samples) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("arap gradients match finite differences") {
  Rng rng(41);
  std::vector<Vec3> p1 = random_points(rng, 25);
  std::vector<Vec3> p2(25);
  for (int i = 0; i < 25; ++i)
    p2[i] = p1[i] + Vec3(0.15 * std::sin(2 * p1[i].y()), 0.1 * p1[i].x() * p1[i].x(), 0.05);
  std::vector<double> radii(25, 0.4);
  NeighborGraph g = build_neighbor_graph(p1, radii, 10);
  std::vector<int> samples = {0, 4, 9, 14, 19, 24};

  std::vector<Vec3> g1(25, Vec3::Zero()), g2(25, Vec3::Zero());
  arap_loss(p1, p2, g, samples, &g1, &g2);

  // the estimated rotations sit at a minimum, so the detached-rotation
  // gradient agrees with full finite differences (envelope theorem)
  const double h = 1e-6;
  for (int i = 0; i < 25; i += 3)
    for (int k = 0; k < 3; ++k) {
      {
        std::vector<Vec3> pp = p1, pm = p1;
        pp[i][k] += h;
        pm[i][k] -= h;
        double fd = (arap_loss(pp, p2, g, samples) - arap_loss(pm, p2, g, samples)) / (2 * h);
        CHECK(g1[i][k] == doctest::Approx(fd).epsilon(1e-4));
      }
      {
        std::vector<Vec3> pp = p2, pm = p2;
        pp[i][k] += h;
        pm[i][k] -= h;
        double fd = (arap_loss(p1, pp, g, samples) - arap_loss(p1, pm, g, samples)) / (2 * h);
        CHECK(g2[i][k] == doctest::Approx(fd).epsilon(1e-4));
      }
    }
}
