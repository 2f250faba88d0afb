#pragma once

#include <string>
#include <vector>

#include "dsgs/types.hpp"

namespace dsgs {

// Row-major HxWx3 image, values nominally in [0,1].
struct Image3 {
  int width = 0, height = 0;
  std::vector<double> data;

  Image3() = default;
  Image3(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h * 3, fill) {}

  double& at(int y, int x, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
  Vec3 pixel(int y, int x) const {
    const double* p = &data[(size_t(y) * width + x) * 3];
    return Vec3(p[0], p[1], p[2]);
  }
  void set_pixel(int y, int x, const Vec3& v) {
    double* p = &data[(size_t(y) * width + x) * 3];
    p[0] = v[0]; p[1] = v[1]; p[2] = v[2];
  }
  size_t pixels() const { return size_t(width) * height; }
  bool same_shape(const Image3& o) const { return width == o.width && height == o.height; }
};

// Scalar HxW image.
struct Image1 {
  int width = 0, height = 0;
  std::vector<double> data;

  Image1() = default;
  Image1(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h, fill) {}

  double& at(int y, int x) { return data[size_t(y) * width + x]; }
  double at(int y, int x) const { return data[size_t(y) * width + x]; }
  size_t pixels() const { return size_t(width) * height; }
};

using Mask = std::vector<uint8_t>;  // one byte per pixel, row-major

// RGBA with alpha kept separately; what PNG loading produces.
struct ImageRgba {
  Image3 rgb;
  Image1 alpha;
};

// 8-bit RGBA (or RGB, alpha=1) PNG in.
ImageRgba read_png(const std::string& path);
// 8-bit RGB out, values clamped to [0,1].
void write_png_rgb(const std::string& path, const Image3& img);
// 16-bit grayscale out; values divided by `scale` then clamped to [0,1].
void write_png_gray16(const std::string& path, const Image1& img, double scale);
// 8-bit RGBA out.
void write_png_rgba(const std::string& path, const Image3& rgb, const Image1& alpha);

Image3 composite_over(const ImageRgba& img, const Vec3& background);
Image1 to_grayscale(const Image3& img);  // luma 0.299/0.587/0.114
Image3 downscale(const Image3& img, int factor);  // box filter

}  // namespace dsgs
