// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "resnerf/common.hpp"
#include "resnerf/rng.hpp"
#include "resnerf/tensor.hpp"

namespace resnerf {

/// Multi-resolution grid setup. Level l has floor(base_resolution *
/// per_level_scale^l) cells per axis; levels whose vertex count fits in
/// table_size index densely, the rest share slots through a spatial hash.
struct HashGridConfig {
  int levels = 8;
  int features_per_level = 2;
  int base_resolution = 16;
  Real per_level_scale = Real(1.5);
  std::uint32_t table_size = 1u << 14;
  Aabb bounds{Vec3(-1, -1, -1), Vec3(1, 1, 1)};

  int feature_dim() const { return levels * features_per_level; }
  int resolution(int level) const;
  /// Rows allocated for one level: min(vertices^3, table_size).
  std::int64_t level_rows(int level) const;
  std::int64_t total_rows() const;
  std::int64_t level_offset(int level) const;

  /// Throws ConfigError when a field is outside its documented range.
  void validate() const;
};

struct FreqEncodingConfig {
  int num_frequencies = 4;
  bool include_input = true;

  int dim() const { return (include_input ? 3 : 0) + 6 * num_frequencies; }
  void validate() const;
};

/// Fresh table, uniform in [-1e-4, 1e-4], requires_grad on.
Tensor make_hash_table(const HashGridConfig& config, RngStream& rng);

/// Encodes one position to its L*F feature vector. Non-recording; the batch
/// variant below is the differentiable path.
std::vector<Real> hash_encode(const Vec3& pos, const HashGridConfig& config,
                              const Tensor& table);

/// Batched encoding [N, L*F], differentiable w.r.t. the table entries. The
/// backward pass recomputes corner indices and trilinear weights from the
/// positions instead of storing them.
Tensor hash_encode_batch(const std::vector<Vec3>& positions, const HashGridConfig& config,
                         const Tensor& table);

/// Corner table rows and trilinear weights for one position at one level.
/// Exposed for tests of the interpolation and hashing rules.
struct GridCorners {
  std::int64_t rows[8];
  Real weights[8];
};
GridCorners grid_corners(const Vec3& pos, const HashGridConfig& config, int level);

/// Spatial hash of an integer vertex coordinate, masked to table_size - 1.
std::uint32_t spatial_hash(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                           std::uint32_t table_size);

/// Sinusoidal direction features: per frequency k and component x,
/// [sin(2^k x), cos(2^k x)], optionally prefixed by the raw input.
std::vector<Real> freq_encode(const Vec3& v, const FreqEncodingConfig& config);

/// Batched variant, returned as a constant [N, dim] tensor (directions are
/// not differentiated through).
Tensor freq_encode_batch(const std::vector<Vec3>& dirs, const FreqEncodingConfig& config);

}  // namespace resnerf
