#include "dsgs/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>

namespace dsgs {

namespace {

struct FileCloser {
  void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t to_u8(double v) {
  double c = std::clamp(v, 0.0, 1.0);
  return uint8_t(std::lround(c * 255.0));
}

}  // namespace

ImageRgba read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DsgsError("cannot open PNG: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DsgsError("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  // Normalize everything to 8-bit RGBA.
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (!(color_type & PNG_COLOR_MASK_ALPHA) && !png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);

  std::vector<uint8_t> row(size_t(w) * 4);
  ImageRgba out;
  out.rgb = Image3(int(w), int(h));
  out.alpha = Image1(int(w), int(h));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      out.rgb.at(int(y), int(x), 0) = row[x * 4 + 0] / 255.0;
      out.rgb.at(int(y), int(x), 1) = row[x * 4 + 1] / 255.0;
      out.rgb.at(int(y), int(x), 2) = row[x * 4 + 2] / 255.0;
      out.alpha.at(int(y), int(x)) = row[x * 4 + 3] / 255.0;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

static void write_png_impl(const std::string& path, int w, int h, int color_type, int bit_depth,
                           const std::vector<uint8_t>& bytes, size_t row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DsgsError("cannot write PNG: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DsgsError("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<uint8_t*>(bytes.data() + size_t(y) * row_bytes));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png_rgb(const std::string& path, const Image3& img) {
  std::vector<uint8_t> bytes(size_t(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        bytes[(size_t(y) * img.width + x) * 3 + c] = to_u8(img.at(y, x, c));
  write_png_impl(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, bytes,
                 size_t(img.width) * 3);
}

void write_png_rgba(const std::string& path, const Image3& rgb, const Image1& alpha) {
  std::vector<uint8_t> bytes(size_t(rgb.width) * rgb.height * 4);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x) {
      size_t o = (size_t(y) * rgb.width + x) * 4;
      for (int c = 0; c < 3; ++c) bytes[o + c] = to_u8(rgb.at(y, x, c));
      bytes[o + 3] = to_u8(alpha.at(y, x));
    }
  write_png_impl(path, rgb.width, rgb.height, PNG_COLOR_TYPE_RGB_ALPHA, 8, bytes,
                 size_t(rgb.width) * 4);
}

void write_png_gray16(const std::string& path, const Image1& img, double scale) {
  std::vector<uint8_t> bytes(size_t(img.width) * img.height * 2);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double v = std::clamp(img.at(y, x) / scale, 0.0, 1.0);
      uint16_t u = uint16_t(std::lround(v * 65535.0));
      size_t o = (size_t(y) * img.width + x) * 2;
      bytes[o] = uint8_t(u >> 8);  // PNG is big-endian
      bytes[o + 1] = uint8_t(u & 0xFF);
    }
  write_png_impl(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 16, bytes,
                 size_t(img.width) * 2);
}

Image3 composite_over(const ImageRgba& img, const Vec3& background) {
  Image3 out(img.rgb.width, img.rgb.height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      double a = img.alpha.at(y, x);
      Vec3 c = img.rgb.pixel(y, x) * a + background * (1.0 - a);
      out.set_pixel(y, x, c);
    }
  return out;
}

Image1 to_grayscale(const Image3& img) {
  Image1 g(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      g.at(y, x) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
  return g;
}

Image3 downscale(const Image3& img, int factor) {
  if (factor <= 1) return img;
  int w = img.width / factor, h = img.height / factor;
  Image3 out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Vec3 acc = Vec3::Zero();
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx)
          acc += img.pixel(y * factor + dy, x * factor + dx);
      out.set_pixel(y, x, acc / double(factor * factor));
    }
  return out;
}

}  // namespace dsgs
