#include "fprf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "fprf/error.hpp"

namespace fprf {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct Decoded {
  size_t height = 0, width = 0;
  std::vector<uint8_t> rgba;  // always 4 channels after transforms
};

Decoded decode(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  require(f != nullptr, ErrorKind::Data, "cannot open image " + path);
  unsigned char sig[8];
  require(std::fread(sig, 1, 8, f.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0, ErrorKind::Data,
          path + " is not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  Decoded d;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::Data, "failed to decode PNG " + path);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_PALETTE)
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  d.width = png_get_image_width(png, info);
  d.height = png_get_image_height(png, info);
  d.rgba.resize(d.width * d.height * 4);
  rows.resize(d.height);
  for (size_t y = 0; y < d.height; ++y) rows[y] = d.rgba.data() + y * d.width * 4;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return d;
}

}  // namespace

Tensor read_png_rgb(const std::string& path) {
  const Decoded d = decode(path);
  Tensor img({d.height, d.width, 3});
  for (size_t p = 0; p < d.height * d.width; ++p)
    for (size_t k = 0; k < 3; ++k) img[p * 3 + k] = d.rgba[p * 4 + k] / 255.0;
  return img;
}

std::vector<uint8_t> read_png_channel(const std::string& path, size_t channel, size_t& height, size_t& width) {
  require(channel < 4, ErrorKind::Domain, "PNG channel index out of range");
  const Decoded d = decode(path);
  height = d.height;
  width = d.width;
  std::vector<uint8_t> out(d.height * d.width);
  for (size_t p = 0; p < out.size(); ++p) out[p] = d.rgba[p * 4 + channel];
  return out;
}

void write_png_u8(const std::string& path, const std::vector<uint8_t>& rgb, size_t height, size_t width) {
  require(rgb.size() == height * width * 3, ErrorKind::Dimension, "PNG buffer size mismatch");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  require(f != nullptr, ErrorKind::Data, "cannot write image " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::Data, "failed to encode PNG " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (size_t y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(rgb.data() + y * width * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png(const std::string& path, const Tensor& image) {
  require(image.rank() == 3 && (image.dim(2) == 1 || image.dim(2) == 3), ErrorKind::Dimension,
          "write_png expects [H x W x 1|3], got " + shape_string(image.shape()));
  const size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  std::vector<uint8_t> rgb(h * w * 3);
  for (size_t p = 0; p < h * w; ++p) {
    for (size_t k = 0; k < 3; ++k) {
      const Real v = image[p * c + (c == 1 ? 0 : k)];
      const Real clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
      rgb[p * 3 + k] = static_cast<uint8_t>(std::lround(clamped * 255.0));
    }
  }
  write_png_u8(path, rgb, h, w);
}

}  // namespace fprf
