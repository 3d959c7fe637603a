// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "resnerf/common.hpp"

namespace resnerf {

/// Named substream of a single top-level seed. Every source of randomness in
/// the pipeline (pose sampling, weight init, ray shuffling, stratified jitter)
/// derives its own stream as RngStream(seed, "name", index), so runs are
/// reproducible from the seed alone and streams never alias each other.
///
/// Floats are produced from raw mt19937 words rather than
/// std::uniform_real_distribution so that sequences do not depend on the
/// standard library implementation.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a(seed, name, index);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    engine_.seed(seq);
  }

  std::uint32_t next_u32() { return engine_(); }

  /// Uniform in [0, 1).
  Real uniform() {
    return Real(engine_() >> 8) * Real(1.0 / 16777216.0);
  }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint32_t below(std::uint32_t n) {
    // Rejection-free modulo bias is negligible for our n (<< 2^32).
    return engine_() % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(static_cast<std::uint32_t>(i))]);
    }
  }

 private:
  static std::uint64_t fnv1a(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint8_t byte) {
      h ^= byte;
      h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(seed >> (8 * i)));
    for (char c : name) mix(static_cast<std::uint8_t>(c));
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(index >> (8 * i)));
    return h;
  }

  std::mt19937 engine_;
};

}  // namespace resnerf
