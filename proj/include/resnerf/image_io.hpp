// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "resnerf/common.hpp"

namespace resnerf {

struct ImageRgb8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, interleaved RGB
};

struct ImageGray16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};

struct ImageF32 {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major, top row first
};

void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& img);
ImageRgb8 read_png_rgb8(const std::filesystem::path& path);

void write_png_gray16(const std::filesystem::path& path, const ImageGray16& img);
ImageGray16 read_png_gray16(const std::filesystem::path& path);

/// Grayscale PFM ("Pf"), little-endian, stored bottom row first per the
/// format; the in-memory layout here is top row first.
void write_pfm(const std::filesystem::path& path, const ImageF32& img);
ImageF32 read_pfm(const std::filesystem::path& path);

}  // namespace resnerf
