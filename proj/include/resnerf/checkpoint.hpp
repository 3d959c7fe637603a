// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "resnerf/tensor.hpp"

namespace resnerf {

/// Named-tensor container with a free-form JSON config block.
///
/// On-disk layout: an 8-byte little-endian header length, the JSON header
/// (tensor names, shapes, dtype "f32", embedded config), then the raw tensor
/// payloads as little-endian float32 in header order. Values are stored as
/// f32 regardless of the build's Real width so files are interchangeable.
struct Checkpoint {
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  std::vector<Entry> tensors;
  nlohmann::json config;

  void add(std::string name, Tensor t);
  const Tensor* find(std::string_view name) const;
  /// Like find, but a missing name is a data error.
  const Tensor& at(std::string_view name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over a file's bytes; used for change detection, not security.
std::uint64_t file_digest(const std::filesystem::path& path);

}  // namespace resnerf
