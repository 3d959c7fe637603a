// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "resnerf/errors.hpp"

namespace resnerf {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw DataError("image: cannot open '" + path.string() + "'");
  return f;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<png_bytep>& rows) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png: create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png: create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png: write failed for '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // buffers are host little-endian
  png_write_image(png, const_cast<png_bytep*>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw DataError("png: rgb8 buffer size does not match dimensions");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3);
  }
  write_png(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

ImageRgb8 read_png_rgb8(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("png: create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("png: create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) {
    throw DataError("png: '" + path.string() + "' is not a readable PNG");
  }
  png_init_io(r.png, f.get());
  png_read_info(r.png, r.info);

  png_set_expand(r.png);
  png_set_strip_16(r.png);
  png_set_strip_alpha(r.png);
  png_set_gray_to_rgb(r.png);
  png_read_update_info(r.png, r.info);

  ImageRgb8 img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  if (png_get_rowbytes(r.png, r.info) != static_cast<std::size_t>(img.width) * 3) {
    throw DataError("png: unexpected row layout in '" + path.string() + "'");
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3;
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

void write_png_gray16(const std::filesystem::path& path, const ImageGray16& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw DataError("png: gray16 buffer size does not match dimensions");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
        img.pixels.data() + static_cast<std::size_t>(y) * img.width));
  }
  write_png(path, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

ImageGray16 read_png_gray16(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("png: create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("png: create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) {
    throw DataError("png: '" + path.string() + "' is not a readable PNG");
  }
  png_init_io(r.png, f.get());
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 16) {
    throw DataError("png: expected 16-bit grayscale in '" + path.string() + "'");
  }
  png_set_swap(r.png);
  png_read_update_info(r.png, r.info);

  ImageGray16 img;
  img.width = static_cast<int>(png_get_image_width(r.png, r.info));
  img.height = static_cast<int>(png_get_image_height(r.png, r.info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_byte*>(
        img.pixels.data() + static_cast<std::size_t>(y) * img.width);
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return img;
}

void write_pfm(const std::filesystem::path& path, const ImageF32& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw DataError("pfm: buffer size does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("pfm: cannot open '" + path.string() + "' for writing");
  out << "Pf\n" << img.width << " " << img.height << "\n-1.0\n";
  for (int y = img.height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(img.pixels.data() +
                                            static_cast<std::size_t>(y) * img.width),
              static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(img.width)));
  }
  if (!out) throw DataError("pfm: write failed for '" + path.string() + "'");
}

ImageF32 read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("pfm: cannot open '" + path.string() + "'");
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw DataError("pfm: '" + path.string() + "' is not grayscale PFM");
  ImageF32 img;
  float scale = 0;
  in >> img.width >> img.height >> scale;
  if (!in || img.width <= 0 || img.height <= 0) {
    throw DataError("pfm: bad header in '" + path.string() + "'");
  }
  if (scale > 0) throw DataError("pfm: big-endian files are not supported");
  in.get();  // single whitespace after the scale
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = img.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(img.pixels.data() + static_cast<std::size_t>(y) * img.width),
            static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(img.width)));
  }
  if (!in) throw DataError("pfm: truncated payload in '" + path.string() + "'");
  return img;
}

}  // namespace resnerf
