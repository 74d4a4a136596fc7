// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "apiprompt/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "apiprompt/error.hpp"

namespace apiprompt {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error("cannot open " + path.string());
  return f;
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// Reads the PNG as 8-bit samples with `channels` 1 (gray) or 3 (RGB).
std::vector<std::uint8_t> read_samples(const fs::path& path, int channels, std::size_t& height,
                                       std::size_t& width) {
  FilePtr file = open_file(path, "rb");
  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw Error(path.string() + ": not a PNG file");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw Error("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> samples;
  std::vector<png_bytep> rows;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw Error(path.string() + ": PNG decode failed: " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  const png_byte color = png_get_color_type(png, info);
  if (channels == 3 && (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)) {
    png_set_gray_to_rgb(png);
  }
  if (channels == 1 && (color & PNG_COLOR_MASK_COLOR)) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != width * static_cast<std::size_t>(channels)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(path.string() + ": unexpected PNG layout after conversion");
  }
  samples.resize(height * rowbytes);
  rows.resize(height);
  for (std::size_t r = 0; r < height; ++r) rows[r] = samples.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return samples;
}

void write_samples(const fs::path& path, std::span<const std::uint8_t> samples, std::size_t height,
                   std::size_t width, int channels) {
  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error, on_png_warning);
  if (!png) throw Error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw Error(path.string() + ": PNG encode failed: " + error);
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 0);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
  png_write_info(png, info);
  const std::size_t rowbytes = width * static_cast<std::size_t>(channels);
  for (std::size_t r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(samples.data() + r * rowbytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error("failed writing " + path.string());
}

}  // namespace

RgbImage read_png(const fs::path& path) {
  std::size_t h = 0, w = 0;
  auto samples = read_samples(path, 3, h, w);
  return RgbImage(h, w, std::move(samples));
}

void write_png(const RgbImage& image, const fs::path& path) {
  write_samples(path, image.samples(), image.height(), image.width(), 3);
}

void write_mask_png(const BinaryMask& mask, const fs::path& path) {
  std::vector<std::uint8_t> samples(mask.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = mask.bits()[i] ? 255 : 0;
  write_samples(path, samples, mask.height(), mask.width(), 1);
}

BinaryMask read_mask_png(const fs::path& path) {
  std::size_t h = 0, w = 0;
  auto samples = read_samples(path, 1, h, w);
  for (auto& s : samples) s = s >= 128 ? 1 : 0;
  return BinaryMask(h, w, std::move(samples));
}

}  // namespace apiprompt
