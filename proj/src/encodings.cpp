// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/encodings.hpp"

#include <cmath>

#include "resnerf/errors.hpp"

namespace resnerf {

namespace {
constexpr std::uint32_t kHashPrimeY = 2654435761u;
constexpr std::uint32_t kHashPrimeZ = 805459861u;
}  // namespace

int HashGridConfig::resolution(int level) const {
  return static_cast<int>(std::floor(base_resolution * std::pow(per_level_scale, level)));
}

std::int64_t HashGridConfig::level_rows(int level) const {
  const std::int64_t v = resolution(level) + 1;
  return std::min(v * v * v, static_cast<std::int64_t>(table_size));
}

std::int64_t HashGridConfig::total_rows() const {
  std::int64_t total = 0;
  for (int l = 0; l < levels; ++l) total += level_rows(l);
  return total;
}

std::int64_t HashGridConfig::level_offset(int level) const {
  std::int64_t off = 0;
  for (int l = 0; l < level; ++l) off += level_rows(l);
  return off;
}

void HashGridConfig::validate() const {
  if (levels < 1) throw ConfigError("grid: levels must be >= 1");
  if (features_per_level < 1) throw ConfigError("grid: features_per_level must be >= 1");
  if (base_resolution < 1) throw ConfigError("grid: base_resolution must be >= 1");
  if (!(per_level_scale > Real(1))) throw ConfigError("grid: per_level_scale must be > 1");
  if (table_size == 0 || (table_size & (table_size - 1)) != 0) {
    throw ConfigError("grid: table_size must be a power of two");
  }
  const Vec3 e = bounds.extent();
  if (!(e.x() > 0 && e.y() > 0 && e.z() > 0)) {
    throw ConfigError("grid: bounds must have positive extent");
  }
}

void FreqEncodingConfig::validate() const {
  if (num_frequencies < 0) throw ConfigError("freq encoding: num_frequencies must be >= 0");
}

std::uint32_t spatial_hash(std::uint32_t x, std::uint32_t y, std::uint32_t z,
                           std::uint32_t table_size) {
  return (x ^ (y * kHashPrimeY) ^ (z * kHashPrimeZ)) & (table_size - 1);
}

GridCorners grid_corners(const Vec3& pos, const HashGridConfig& config, int level) {
  const Vec3 p = config.bounds.normalize_clamped(pos);
  const int res = config.resolution(level);
  const std::int64_t vertices = res + 1;
  const bool dense = vertices * vertices * vertices <= static_cast<std::int64_t>(config.table_size);
  const std::int64_t base = config.level_offset(level);

  std::uint32_t cell[3];
  Real frac[3];
  for (int a = 0; a < 3; ++a) {
    const Real x = p[a] * static_cast<Real>(res);
    const auto c = std::min(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(res - 1));
    cell[a] = c;
    frac[a] = x - static_cast<Real>(c);
  }

  GridCorners out;
  for (int corner = 0; corner < 8; ++corner) {
    std::uint32_t v[3];
    Real w = 1;
    for (int a = 0; a < 3; ++a) {
      const bool hi = (corner >> a) & 1;
      v[a] = cell[a] + (hi ? 1u : 0u);
      w *= hi ? frac[a] : Real(1) - frac[a];
    }
    std::int64_t idx;
    if (dense) {
      idx = (static_cast<std::int64_t>(v[2]) * vertices + v[1]) * vertices + v[0];
    } else {
      idx = spatial_hash(v[0], v[1], v[2], config.table_size);
    }
    out.rows[corner] = base + idx;
    out.weights[corner] = w;
  }
  return out;
}

Tensor make_hash_table(const HashGridConfig& config, RngStream& rng) {
  config.validate();
  const std::int64_t rows = config.total_rows();
  std::vector<Real> vals(static_cast<std::size_t>(rows * config.features_per_level));
  for (Real& v : vals) v = rng.uniform(Real(-1e-4), Real(1e-4));
  return make_tensor({static_cast<int>(rows), config.features_per_level}, std::move(vals), true);
}

std::vector<Real> hash_encode(const Vec3& pos, const HashGridConfig& config,
                              const Tensor& table) {
  if (!pos.allFinite()) throw NumericError("hash_encode: non-finite position");
  const int f = config.features_per_level;
  std::vector<Real> out(static_cast<std::size_t>(config.feature_dim()), Real(0));
  const Real* tab = table.values().data();
  for (int l = 0; l < config.levels; ++l) {
    const GridCorners corners = grid_corners(pos, config, l);
    Real* dst = out.data() + static_cast<std::size_t>(l) * f;
    for (int c = 0; c < 8; ++c) {
      const Real w = corners.weights[c];
      const Real* row = tab + static_cast<std::size_t>(corners.rows[c]) * f;
      for (int j = 0; j < f; ++j) dst[j] += w * row[j];
    }
  }
  return out;
}

Tensor hash_encode_batch(const std::vector<Vec3>& positions, const HashGridConfig& config,
                         const Tensor& table) {
  const int f = config.features_per_level;
  const int dim = config.feature_dim();
  const int n = static_cast<int>(positions.size());
  std::vector<Real> out(static_cast<std::size_t>(n) * dim, Real(0));
  const Real* tab = table.values().data();
  for (int i = 0; i < n; ++i) {
    if (!positions[static_cast<std::size_t>(i)].allFinite()) {
      throw NumericError("hash_encode: non-finite position");
    }
    Real* dst = out.data() + static_cast<std::size_t>(i) * dim;
    for (int l = 0; l < config.levels; ++l) {
      const GridCorners corners = grid_corners(positions[static_cast<std::size_t>(i)], config, l);
      for (int c = 0; c < 8; ++c) {
        const Real w = corners.weights[c];
        const Real* row = tab + static_cast<std::size_t>(corners.rows[c]) * f;
        for (int j = 0; j < f; ++j) dst[static_cast<std::size_t>(l) * f + j] += w * row[j];
      }
    }
  }

  const bool rec = Graph::active() && table.requires_grad();
  Tensor result = make_tensor({n, dim}, std::move(out), rec);
  check_finite(result, OpKind::kHashEncode);
  if (rec) {
    // Corner rows and weights are recomputed here rather than cached; the
    // scatter-add runs serially so repeated rows accumulate deterministically.
    Graph::active()->record(
        OpKind::kHashEncode, {table.impl()}, result,
        [td = table.impl(), od = result.impl(), positions, config, f, dim, n]() {
          if (od->grad.empty() || !td->requires_grad) return;
          if (td->grad.empty()) td->grad.assign(td->values.size(), Real(0));
          for (int i = 0; i < n; ++i) {
            const Real* g = od->grad.data() + static_cast<std::size_t>(i) * dim;
            for (int l = 0; l < config.levels; ++l) {
              const GridCorners corners =
                  grid_corners(positions[static_cast<std::size_t>(i)], config, l);
              for (int c = 0; c < 8; ++c) {
                const Real w = corners.weights[c];
                Real* dst = td->grad.data() + static_cast<std::size_t>(corners.rows[c]) * f;
                for (int j = 0; j < f; ++j) dst[j] += w * g[static_cast<std::size_t>(l) * f + j];
              }
            }
          }
        });
  }
  return result;
}

std::vector<Real> freq_encode(const Vec3& v, const FreqEncodingConfig& config) {
  std::vector<Real> out;
  out.reserve(static_cast<std::size_t>(config.dim()));
  if (config.include_input) {
    out.push_back(v.x());
    out.push_back(v.y());
    out.push_back(v.z());
  }
  Real scale = 1;
  for (int k = 0; k < config.num_frequencies; ++k) {
    for (int a = 0; a < 3; ++a) {
      out.push_back(std::sin(scale * v[a]));
      out.push_back(std::cos(scale * v[a]));
    }
    scale *= 2;
  }
  return out;
}

Tensor freq_encode_batch(const std::vector<Vec3>& dirs, const FreqEncodingConfig& config) {
  const int dim = config.dim();
  const int n = static_cast<int>(dirs.size());
  std::vector<Real> out;
  out.reserve(static_cast<std::size_t>(n) * dim);
  for (const Vec3& d : dirs) {
    const std::vector<Real> row = freq_encode(d, config);
    out.insert(out.end(), row.begin(), row.end());
  }
  return make_tensor({n, dim}, std::move(out), false);
}

}  // namespace resnerf
