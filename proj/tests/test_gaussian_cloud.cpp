#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dsgs/gaussian_cloud.hpp"
#include "dsgs/ply_io.hpp"
#include "dsgs/rng.hpp"

using namespace dsgs;

TEST_CASE("build_covariance identity case") {
  Mat3 s = build_covariance(Vec4(1, 0, 0, 0), Vec3::Zero());
  CHECK((s - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("build_covariance anisotropic case") {
  Mat3 s = build_covariance(Vec4(1, 0, 0, 0), Vec3(std::log(2.0), 0, 0));
  Mat3 expected = Vec3(4, 1, 1).asDiagonal();
  CHECK((s - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero quaternion is rejected") {
  CHECK_THROWS_AS(build_covariance(Vec4::Zero(), Vec3::Zero()), DsgsError);
}

TEST_CASE("covariance is symmetric PSD for random parameters") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    if (q.norm() < 1e-6) continue;
    Vec3 ls(rng.uniform(-3, 2), rng.uniform(-3, 2), rng.uniform(-3, 2));
    Mat3 s = build_covariance(q, ls);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::LLT<Mat3> llt(s + 1e-12 * Mat3::Identity());
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("build_covariance gradients match finite differences") {
  Rng rng(13);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    Vec3 ls(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Mat3 dSigma;  // random symmetric upstream gradient
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c <= r; ++c) dSigma(r, c) = dSigma(c, r) = rng.normal();

    Vec4 dq = Vec4::Zero();
    Vec3 dls = Vec3::Zero();
    build_covariance_backward(q, ls, dSigma, dq, dls);

    auto loss = [&](const Vec4& qq, const Vec3& ll) {
      return (dSigma.array() * build_covariance(qq, ll).array()).sum();
    };
    for (int k = 0; k < 4; ++k) {
      Vec4 qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      double fd = (loss(qp, ls) - loss(qm, ls)) / (2 * h);
      CHECK(dq[k] == doctest::Approx(fd).epsilon(1e-5));
    }
    for (int k = 0; k < 3; ++k) {
      Vec3 lp = ls, lm = ls;
      lp[k] += h;
      lm[k] -= h;
      double fd = (loss(q, lp) - loss(q, lm)) / (2 * h);
      CHECK(dls[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("gaussian normal: shortest axis, camera-facing") {
  Vec4 q(1, 0, 0, 0);
  Vec3 ls = Vec3(0.0, 0.0, std::log(0.1));
  CHECK((gaussian_normal(q, ls, Vec3::Zero(), Vec3(0, 0, -5)) - Vec3(0, 0, -1)).norm() < 1e-12);
  CHECK((gaussian_normal(q, ls, Vec3::Zero(), Vec3(0, 0, 5)) - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("gaussian normal tie-break picks axis 0") {
  int axis = -1;
  double sign = 0;
  gaussian_normal_ex(Vec4(1, 0, 0, 0), Vec3::Zero(), Vec3::Zero(), Vec3(5, 0, 0), axis, sign);
  CHECK(axis == 0);
}

TEST_CASE("gaussian normal unit length and sign invariant") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    if (q.norm() < 1e-6) continue;
    Vec3 ls(rng.uniform(-2, 1), rng.uniform(-2, 1), rng.uniform(-2, 1));
    Vec3 mu(rng.normal(), rng.normal(), rng.normal());
    Vec3 cam(rng.normal(), rng.normal(), rng.normal());
    Vec3 n = gaussian_normal(q, ls, mu, cam);
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.dot(mu - cam) <= 1e-12);
  }
}

TEST_CASE("activations are monotone") {
  CHECK(sigmoid(0.3) > sigmoid(0.2));
  CHECK(std::exp(0.3) > std::exp(0.2));
}

TEST_CASE("ply round trip is bitwise exact") {
  Rng rng(23);
  GaussianCloud cloud;
  cloud.sh_degree = 1;
  cloud.resize(3);
  for (int i = 0; i < 3; ++i) {
    cloud.pos[i] = Vec3(rng.normal(), rng.normal(), rng.normal());
    cloud.rot_raw[i] = Vec4(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    cloud.log_scale[i] = Vec3(rng.normal(), rng.normal(), rng.normal());
    cloud.opacity_raw[i] = rng.normal();
  }
  for (double& v : cloud.sh) v = rng.normal();

  std::string path = (std::filesystem::temp_directory_path() / "dsgs_cloud.ply").string();
  save_ply(cloud, path);
  GaussianCloud back = load_ply(path);
  REQUIRE(back.size() == 3);
  CHECK(back.sh_degree == 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.pos[i] == cloud.pos[i]);
    CHECK(back.rot_raw[i] == cloud.rot_raw[i]);
    CHECK(back.log_scale[i] == cloud.log_scale[i]);
    CHECK(back.opacity_raw[i] == cloud.opacity_raw[i]);
  }
  CHECK(back.sh == cloud.sh);
  std::remove(path.c_str());
}

TEST_CASE("empty cloud ply round trip") {
  GaussianCloud cloud;
  cloud.sh_degree = 0;
  std::string path = (std::filesystem::temp_directory_path() / "dsgs_empty.ply").string();
  save_ply(cloud, path);
  GaussianCloud back = load_ply(path);
  CHECK(back.size() == 0);
  std::remove(path.c_str());
}

TEST_CASE("ply with missing property is a schema error") {
  std::string path = (std::filesystem::temp_directory_path() / "dsgs_bad.ply").string();
  {
    std::ofstream f(path, std::ios::binary);
    f << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
         "property double x\nproperty double y\nproperty double z\nend_header\n";
    double p[3] = {0, 0, 0};
    f.write(reinterpret_cast<const char*>(p), sizeof(p));
  }
  CHECK_THROWS_AS(load_ply(path), DsgsError);
  std::remove(path.c_str());
}
