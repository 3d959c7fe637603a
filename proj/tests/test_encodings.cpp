// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "resnerf/encodings.hpp"
#include "resnerf/errors.hpp"
#include "resnerf/rng.hpp"

using namespace resnerf;

namespace {

// Small grid covering both index paths: level 0 dense, level 1 hashed.
HashGridConfig small_grid() {
  HashGridConfig cfg;
  cfg.levels = 2;
  cfg.features_per_level = 2;
  cfg.base_resolution = 4;
  cfg.per_level_scale = Real(1.5);
  cfg.table_size = 1u << 8;
  cfg.bounds = Aabb{Vec3(0, 0, 0), Vec3(1, 1, 1)};
  return cfg;
}

}  // namespace

TEST_CASE("grid config validation and layout") {
  HashGridConfig cfg = small_grid();
  cfg.validate();
  CHECK(cfg.resolution(0) == 4);
  CHECK(cfg.resolution(1) == 6);
  CHECK(cfg.level_rows(0) == 125);  // 5^3 vertices fit densely
  CHECK(cfg.level_rows(1) == 256);  // 7^3 = 343 spills into the hash
  CHECK(cfg.level_offset(1) == 125);
  CHECK(cfg.total_rows() == 381);

  HashGridConfig bad = cfg;
  bad.table_size = 100;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.per_level_scale = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.levels = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  HashGridConfig defaults;
  defaults.validate();
  CHECK(defaults.feature_dim() == 16);
  // Default table stays under 1 MiB of f32 features.
  CHECK(defaults.total_rows() * defaults.features_per_level * 4 < (1 << 20));
}

TEST_CASE("spatial hash is pure and in range") {
  const std::uint32_t t = 1u << 14;
  for (std::uint32_t x = 0; x < 5; ++x) {
    for (std::uint32_t y = 0; y < 5; ++y) {
      const std::uint32_t h1 = spatial_hash(x, y, 7, t);
      const std::uint32_t h2 = spatial_hash(x, y, 7, t);
      CHECK(h1 == h2);
      CHECK(h1 < t);
    }
  }
  CHECK(spatial_hash(3, 0, 0, t) == 3u);  // x-coordinate prime is 1
}

TEST_CASE("trilinear weights: vertex, cell center, partition of unity") {
  HashGridConfig cfg = small_grid();
  RngStream rng(2, "enc");
  Tensor table = make_hash_table(cfg, rng);

  // Exactly on a level-0 vertex: one corner carries all the weight.
  const Vec3 vertex(Real(0.25), Real(0.5), Real(0.75));
  GridCorners c0 = grid_corners(vertex, cfg, 0);
  CHECK(c0.weights[0] == doctest::Approx(1.0));
  for (int i = 1; i < 8; ++i) CHECK(c0.weights[i] == doctest::Approx(0.0));
  std::vector<Real> feat = hash_encode(vertex, cfg, table);
  const Real* row = table.values().data() + c0.rows[0] * 2;
  CHECK(feat[0] == doctest::Approx(row[0]));
  CHECK(feat[1] == doctest::Approx(row[1]));

  // Cell center: every corner weighs 1/8 and the feature is the corner mean.
  const Vec3 center(Real(0.125), Real(0.125), Real(0.125));
  GridCorners cc = grid_corners(center, cfg, 0);
  Real mean0 = 0;
  for (int i = 0; i < 8; ++i) {
    CHECK(cc.weights[i] == doctest::Approx(0.125));
    mean0 += table.values()[static_cast<std::size_t>(cc.rows[i]) * 2] / 8;
  }
  CHECK(hash_encode(center, cfg, table)[0] == doctest::Approx(mean0));

  for (int rep = 0; rep < 50; ++rep) {
    const Vec3 p(rng.uniform(), rng.uniform(), rng.uniform());
    for (int l = 0; l < cfg.levels; ++l) {
      GridCorners c = grid_corners(p, cfg, l);
      Real sum = 0;
      for (int i = 0; i < 8; ++i) {
        CHECK(c.weights[i] >= Real(0));
        sum += c.weights[i];
      }
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("encoding is continuous inside a cell") {
  HashGridConfig cfg = small_grid();
  RngStream rng(4, "enc2");
  Tensor table = make_hash_table(cfg, rng);
  const Vec3 p(Real(0.3123), Real(0.5531), Real(0.7719));
  const Vec3 q = p + Vec3(Real(1e-6), Real(1e-6), Real(1e-6));
  std::vector<Real> fp = hash_encode(p, cfg, table);
  std::vector<Real> fq = hash_encode(q, cfg, table);
  for (std::size_t i = 0; i < fp.size(); ++i) {
    CHECK(std::abs(fp[i] - fq[i]) < Real(1e-5) * (Real(1) + std::abs(fp[i])));
  }
}

TEST_CASE("positions outside bounds clamp to the box") {
  HashGridConfig cfg = small_grid();
  RngStream rng(5, "enc3");
  Tensor table = make_hash_table(cfg, rng);
  CHECK(hash_encode(Vec3(-3, -3, -3), cfg, table) ==
        hash_encode(Vec3(0, 0, 0), cfg, table));
  CHECK(hash_encode(Vec3(2, 2, 2), cfg, table) == hash_encode(Vec3(1, 1, 1), cfg, table));
  CHECK_THROWS_AS(hash_encode(Vec3(kInf, 0, 0), cfg, table), NumericError);
}

TEST_CASE("batch encoding matches single-point and is differentiable") {
  HashGridConfig cfg = small_grid();
  RngStream rng(6, "enc4");
  Tensor table = make_hash_table(cfg, rng);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());

  Tensor batch = hash_encode_batch(pts, cfg, table);
  CHECK(batch.shape() == std::vector<int>{10, cfg.feature_dim()});
  for (int i = 0; i < 10; ++i) {
    std::vector<Real> single = hash_encode(pts[static_cast<std::size_t>(i)], cfg, table);
    for (int j = 0; j < cfg.feature_dim(); ++j) {
      CHECK(batch.values()[static_cast<std::size_t>(i) * cfg.feature_dim() + j] ==
            doctest::Approx(single[static_cast<std::size_t>(j)]));
    }
  }

  // Gradient of the feature sum w.r.t. a touched table row is its summed
  // trilinear weight (features_per_level grads per row, equal per column).
  const Vec3 p = pts[0];
  Graph g;
  {
    Graph::Scope scope(g);
    Tensor y = sum_all(hash_encode_batch({p}, cfg, table));
    g.backward(y);
  }
  REQUIRE(table.has_grad());
  for (int l = 0; l < cfg.levels; ++l) {
    GridCorners c = grid_corners(p, cfg, l);
    for (int corner = 0; corner < 8; ++corner) {
      Real expected = 0;
      for (int k = 0; k < 8; ++k) {
        if (c.rows[k] == c.rows[corner]) expected += c.weights[k];  // hash collisions merge
      }
      CHECK(table.grad()[static_cast<std::size_t>(c.rows[corner]) * 2] ==
            doctest::Approx(expected).epsilon(1e-4));
    }
  }
  table.zero_grad();

  Real err = grad_check(
      [&](const Tensor& t) { return sum_all(square(hash_encode_batch(pts, cfg, t))); },
      table, Real(1e-3));
  CHECK(err < Real(1e-3));
}

TEST_CASE("frequency encoding examples") {
  FreqEncodingConfig one;
  one.num_frequencies = 1;
  one.include_input = false;
  std::vector<Real> f = freq_encode(Vec3(0, 0, 1), one);
  REQUIRE(f.size() == 6);
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == doctest::Approx(1.0));
  CHECK(f[2] == doctest::Approx(0.0));
  CHECK(f[3] == doctest::Approx(1.0));
  CHECK(f[4] == doctest::Approx(0.8415).epsilon(1e-3));
  CHECK(f[5] == doctest::Approx(0.5403).epsilon(1e-3));

  FreqEncodingConfig two;
  two.num_frequencies = 2;
  two.include_input = false;
  std::vector<Real> fx = freq_encode(Vec3(1, 0, 0), two);
  std::vector<Real> fnx = freq_encode(Vec3(-1, 0, 0), two);
  REQUIRE(fx.size() == 12);
  for (std::size_t i = 0; i < fx.size(); i += 2) {
    CHECK(fnx[i] == doctest::Approx(-fx[i]));      // sin is odd
    CHECK(fnx[i + 1] == doctest::Approx(fx[i + 1]));  // cos is even
  }

  FreqEncodingConfig passthrough;
  passthrough.num_frequencies = 0;
  passthrough.include_input = true;
  const Vec3 v = Vec3(Real(0.6), Real(0.8), Real(0)).normalized();
  std::vector<Real> id = freq_encode(v, passthrough);
  REQUIRE(id.size() == 3);
  CHECK(id[0] == doctest::Approx(v.x()));
  CHECK(id[1] == doctest::Approx(v.y()));
  CHECK(id[2] == doctest::Approx(v.z()));

  FreqEncodingConfig bad;
  bad.num_frequencies = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  std::vector<Vec3> dirs{Vec3(0, 0, 1), Vec3(1, 0, 0)};
  Tensor batch = freq_encode_batch(dirs, one);
  CHECK(batch.shape() == std::vector<int>{2, 6});
  CHECK_FALSE(batch.requires_grad());
  CHECK(batch.values()[4] == doctest::Approx(0.8415).epsilon(1e-3));
}
