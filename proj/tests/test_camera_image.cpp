#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "dsgs/camera.hpp"
#include "dsgs/image.hpp"
#include "dsgs/rng.hpp"

using namespace dsgs;

TEST_CASE("focal length from horizontal fov") {
  // 0.5 * 800 / tan(0.4363323129985824) for a 50-degree fov
  CHECK(focal_from_fov(0.8726646259971648, 800) == doctest::Approx(857.8027682038235).epsilon(1e-12));
}

TEST_CASE("look_at camera geometry") {
  CameraView v = look_at_camera(Vec3(0, 0, -5), Vec3::Zero(), Vec3(0, 1, 0), 0.9, 64, 64);
  v.validate();
  CHECK(v.R_c.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  // forward axis (third column) points from eye toward the target
  Vec3 fwd = v.R_c.col(2);
  CHECK(fwd.dot((Vec3::Zero() - Vec3(0, 0, -5)).normalized()) == doctest::Approx(1.0));
  // the target lands on the principal point
  Vec3 pc = v.world_to_cam(Vec3::Zero());
  CHECK(pc.z() == doctest::Approx(5.0));
  Vec2 px = v.project_cam(pc);
  CHECK(px.x() == doctest::Approx(v.cx));
  CHECK(px.y() == doctest::Approx(v.cy));
}

TEST_CASE("world/cam transforms invert each other") {
  Rng rng(7);
  CameraView v = look_at_camera(Vec3(2, -1, 3), Vec3(0.2, 0.1, 0), Vec3(0, 0, 1), 0.8, 32, 32);
  for (int i = 0; i < 20; ++i) {
    Vec3 p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    CHECK((v.cam_to_world(v.world_to_cam(p)) - p).norm() < 1e-12);
  }
}

TEST_CASE("camera validation rejects bad inputs") {
  CameraView v = look_at_camera(Vec3(0, 0, -5), Vec3::Zero(), Vec3(0, 1, 0), 0.9, 64, 64);
  v.time = 1.5;
  CHECK_THROWS_AS(v.validate(), DsgsError);
  v.time = 0.5;
  v.fx = -1;
  CHECK_THROWS_AS(v.validate(), DsgsError);
}

TEST_CASE("png round trip rgb") {
  Rng rng(3);
  Image3 img(9, 7);
  for (double& d : img.data) d = rng.uniform();
  std::string path = (std::filesystem::temp_directory_path() / "dsgs_rt.png").string();
  write_png_rgb(path, img);
  ImageRgba back = read_png(path);
  REQUIRE(back.rgb.width == 9);
  REQUIRE(back.rgb.height == 7);
  for (size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(back.rgb.data[i] - img.data[i]) <= 0.5 / 255.0 + 1e-12);
  for (double a : back.alpha.data) CHECK(a == 1.0);
  std::remove(path.c_str());
}

TEST_CASE("png round trip rgba alpha channel") {
  Image3 rgb(4, 4, 0.25);
  Image1 alpha(4, 4, 0.0);
  alpha.at(1, 2) = 1.0;
  std::string path = (std::filesystem::temp_directory_path() / "dsgs_rta.png").string();
  write_png_rgba(path, rgb, alpha);
  ImageRgba back = read_png(path);
  CHECK(back.alpha.at(1, 2) == 1.0);
  CHECK(back.alpha.at(0, 0) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("alpha compositing over a background") {
  ImageRgba img;
  img.rgb = Image3(2, 1);
  img.alpha = Image1(2, 1);
  img.rgb.set_pixel(0, 0, Vec3(1, 0, 0));
  img.alpha.at(0, 0) = 1.0;
  img.rgb.set_pixel(0, 1, Vec3(1, 0, 0));
  img.alpha.at(0, 1) = 0.25;
  Image3 out = composite_over(img, Vec3(1, 1, 1));
  CHECK(out.pixel(0, 0).isApprox(Vec3(1, 0, 0)));
  CHECK(out.pixel(0, 1).isApprox(Vec3(1.0, 0.75, 0.75)));
}

TEST_CASE("grayscale uses the stated luma weights") {
  Image3 img(1, 1);
  img.set_pixel(0, 0, Vec3(1.0, 0.5, 0.25));
  Image1 g = to_grayscale(img);
  CHECK(g.at(0, 0) == doctest::Approx(0.299 * 1.0 + 0.587 * 0.5 + 0.114 * 0.25).epsilon(1e-12));
}

TEST_CASE("downscale is a box filter") {
  Image3 img(4, 2);
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 3; ++c) {
      img.at(0, x, c) = x;
      img.at(1, x, c) = x + 4;
    }
  Image3 out = downscale(img, 2);
  REQUIRE(out.width == 2);
  REQUIRE(out.height == 1);
  CHECK(out.at(0, 0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(out.at(0, 1, 0) == doctest::Approx((2 + 3 + 6 + 7) / 4.0));
}
