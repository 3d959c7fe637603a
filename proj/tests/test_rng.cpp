// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <vector>

#include "resnerf/rng.hpp"

using namespace resnerf;

TEST_CASE("streams are deterministic per (seed, name, index)") {
  RngStream a(42, "poses", 0);
  RngStream b(42, "poses", 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

  RngStream c(42, "poses", 1);
  RngStream d(42, "shuffle", 0);
  RngStream e(43, "poses", 0);
  RngStream f(42, "poses", 0);
  bool all_same_c = true, all_same_d = true, all_same_e = true;
  for (int i = 0; i < 16; ++i) {
    const std::uint32_t r = f.next_u32();
    all_same_c &= c.next_u32() == r;
    all_same_d &= d.next_u32() == r;
    all_same_e &= e.next_u32() == r;
  }
  CHECK_FALSE(all_same_c);
  CHECK_FALSE(all_same_d);
  CHECK_FALSE(all_same_e);
}

TEST_CASE("uniform stays in range") {
  RngStream rng(1, "u");
  for (int i = 0; i < 1000; ++i) {
    Real v = rng.uniform();
    CHECK(v >= Real(0));
    CHECK(v < Real(1));
  }
  for (int i = 0; i < 1000; ++i) {
    Real v = rng.uniform(Real(-2), Real(3));
    CHECK(v >= Real(-2));
    CHECK(v < Real(3));
  }
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> v2 = v1;
  RngStream r1(5, "shuffle", 3);
  RngStream r2(5, "shuffle", 3);
  r1.shuffle(v1);
  r2.shuffle(v2);
  CHECK(v1 == v2);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}
