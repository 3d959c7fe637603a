// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "resnerf/rng.hpp"
#include "resnerf/tensor.hpp"

using namespace resnerf;

namespace {

Tensor rand_tensor(std::vector<int> shape, RngStream& rng, Real lo = Real(-1),
                   Real hi = Real(1)) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<Real> v(static_cast<std::size_t>(n));
  for (Real& x : v) x = rng.uniform(lo, hi);
  return make_tensor(std::move(shape), std::move(v), false);
}

}  // namespace

TEST_CASE("tensor factories and accessors") {
  Tensor z = Tensor::zeros({2, 3});
  CHECK(z.numel() == 6);
  CHECK(z.rank() == 2);
  CHECK(z.dim(1) == 3);
  CHECK(z.values()[5] == Real(0));

  Tensor s = Tensor::scalar(Real(2.5));
  CHECK(s.item() == doctest::Approx(2.5));
  CHECK_THROWS_AS(z.item(), DimensionError);

  CHECK_THROWS_AS(make_tensor({2, 2}, {1, 2, 3}, false), DimensionError);
}

TEST_CASE("elementwise forward values and broadcasts") {
  Tensor a = Tensor::from_values({2}, {1, 2});
  Tensor b = Tensor::from_values({2}, {3, 4});
  Tensor sum = add(a, b);
  CHECK(sum.values()[0] == Real(4));
  CHECK(sum.values()[1] == Real(6));

  Tensor m = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor row = Tensor::from_values({2}, {10, 20});
  Tensor col = Tensor::from_values({2, 1}, {100, 200});
  Tensor sc = Tensor::scalar(5);

  Tensor mr = add(m, row);
  CHECK(mr.values()[0] == Real(11));
  CHECK(mr.values()[3] == Real(24));
  Tensor mc = add(m, col);
  CHECK(mc.values()[1] == Real(102));
  CHECK(mc.values()[2] == Real(203));
  Tensor ms = multiply(m, sc);
  CHECK(ms.values()[3] == Real(20));
  Tensor sm = multiply(sc, m);  // commutative swap
  CHECK(sm.values()[3] == Real(20));

  Tensor diff = subtract(sc, m);  // scalar on the left
  CHECK(diff.values()[0] == Real(4));
  CHECK(diff.values()[3] == Real(1));

  CHECK_THROWS_AS(add(a, Tensor::from_values({3}, {1, 2, 3})), DimensionError);
}

TEST_CASE("matmul forward") {
  Tensor ones_a = Tensor::full({2, 3}, 1);
  Tensor ones_b = Tensor::full({3, 1}, 1);
  Tensor c = matmul(ones_a, ones_b);
  CHECK(c.shape() == std::vector<int>{2, 1});
  CHECK(c.values()[0] == Real(3));
  CHECK(c.values()[1] == Real(3));

  Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from_values({2, 2}, {5, 6, 7, 8});
  Tensor ab = matmul(a, b);
  CHECK(ab.values()[0] == Real(19));
  CHECK(ab.values()[1] == Real(22));
  CHECK(ab.values()[2] == Real(43));
  CHECK(ab.values()[3] == Real(50));

  Tensor v = Tensor::from_values({2}, {1, 1});
  Tensor av = matmul(a, v);
  CHECK(av.shape() == std::vector<int>{2});
  CHECK(av.values()[0] == Real(3));
  CHECK(av.values()[1] == Real(7));

  CHECK_THROWS_AS(matmul(a, Tensor::zeros({3, 2})), DimensionError);
}

TEST_CASE("activation forward values") {
  Tensor x = Tensor::from_values({4}, {-2, 0, 1, 3});
  Tensor r = relu(x);
  CHECK(r.values()[0] == Real(0));
  CHECK(r.values()[3] == Real(3));
  Tensor s = sigmoid(Tensor::scalar(0));
  CHECK(s.item() == doctest::Approx(0.5));
  CHECK(softplus_scalar(Real(0)) == doctest::Approx(std::log(2.0)));
  // softplus stays finite and linear-ish for large inputs
  CHECK(softplus_scalar(Real(40)) == doctest::Approx(40.0));
  CHECK(sigmoid_scalar(Real(-40)) == doctest::Approx(0.0));
}

TEST_CASE("layout ops forward") {
  Tensor x = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});

  Tensor rs = reshape(x, {3, 2});
  CHECK(rs.values()[4] == Real(5));
  CHECK_THROWS_AS(reshape(x, {4, 2}), DimensionError);

  Tensor sl = slice_cols(x, 1, 3);
  CHECK(sl.shape() == std::vector<int>{2, 2});
  CHECK(sl.values()[0] == Real(2));
  CHECK(sl.values()[3] == Real(6));
  CHECK_THROWS_AS(slice_cols(x, 2, 2), DimensionError);

  Tensor cat = concat_cols({x, sl});
  CHECK(cat.shape() == std::vector<int>{2, 5});
  CHECK(cat.values()[3] == Real(2));
  CHECK(cat.values()[9] == Real(6));

  Tensor g = gather_rows(x, {1, 0, 1});
  CHECK(g.shape() == std::vector<int>{3, 3});
  CHECK(g.values()[0] == Real(4));
  CHECK(g.values()[8] == Real(6));
  CHECK_THROWS_AS(gather_rows(x, {2}), DimensionError);

  Tensor sr = sum_rows(x);
  CHECK(sr.shape() == std::vector<int>{2, 1});
  CHECK(sr.values()[0] == Real(6));
  CHECK(sr.values()[1] == Real(15));

  CHECK(sum_all(x).item() == Real(21));

  Tensor cs = cumsum_exclusive_rows(Tensor::from_values({1, 3}, {1, 2, 3}));
  CHECK(cs.values()[0] == Real(0));
  CHECK(cs.values()[1] == Real(1));
  CHECK(cs.values()[2] == Real(3));
}

TEST_CASE("backward: square, sigmoid, matmul") {
  Graph g;
  Graph::Scope scope(g);

  Tensor x = Tensor::scalar(3, true);
  Tensor y = square(x);
  g.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(6));

  Graph g2;
  {
    Graph::Scope s2(g2);
    Tensor z = Tensor::scalar(0, true);
    Tensor sz = sigmoid(z);
    g2.backward(sz);
    CHECK(z.grad()[0] == doctest::Approx(0.25));
  }

  Graph g3;
  {
    Graph::Scope s3(g3);
    Tensor w = Tensor::full({2, 2}, 1, false);
    Tensor v = Tensor::from_values({2}, {1, 1}, true);
    Tensor out = sum_all(matmul(w, v));
    g3.backward(out);
    CHECK(v.grad()[0] == doctest::Approx(2));
    CHECK(v.grad()[1] == doctest::Approx(2));
    CHECK_FALSE(w.has_grad());
  }
}

TEST_CASE("backward: fan-out accumulates") {
  Graph g;
  Graph::Scope scope(g);
  Tensor x = Tensor::scalar(1.5, true);
  Tensor y = sum_all(add(x, x));
  g.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(2));
}

TEST_CASE("backward: broadcast folds gradients") {
  Graph g;
  Graph::Scope scope(g);
  Tensor m = Tensor::full({2, 3}, 1, false);
  Tensor row = Tensor::zeros({3}, true);
  Tensor col = Tensor::zeros({2, 1}, true);
  Tensor y = sum_all(add(add(m, row), col));
  g.backward(y);
  CHECK(row.grad()[0] == doctest::Approx(2));  // two rows fold onto each entry
  CHECK(row.grad()[2] == doctest::Approx(2));
  CHECK(col.grad()[0] == doctest::Approx(3));
  CHECK(col.grad()[1] == doctest::Approx(3));
}

TEST_CASE("backward: cumsum_exclusive_rows") {
  Graph g;
  Graph::Scope scope(g);
  Tensor x = Tensor::from_values({1, 3}, {1, 2, 3}, true);
  Tensor y = sum_all(cumsum_exclusive_rows(x));
  g.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(2));
  CHECK(x.grad()[1] == doctest::Approx(1));
  CHECK(x.grad()[2] == doctest::Approx(0));
}

TEST_CASE("backward: root must be scalar and runs once") {
  Graph g;
  Graph::Scope scope(g);
  Tensor x = Tensor::from_values({2}, {1, 2}, true);
  Tensor y = square(x);
  CHECK_THROWS_AS(g.backward(y), DimensionError);
  Tensor z = sum_all(y);
  g.backward(z);
  CHECK_THROWS_AS(g.backward(z), Error);
}

TEST_CASE("grads accumulate across graphs until zeroed") {
  Tensor x = Tensor::scalar(2, true);
  for (int i = 0; i < 2; ++i) {
    Graph g;
    Graph::Scope scope(g);
    g.backward(square(x));
  }
  CHECK(x.grad()[0] == doctest::Approx(8));  // 4 + 4
  x.zero_grad();
  CHECK(x.grad()[0] == Real(0));
}

TEST_CASE("NoGrad suppresses recording") {
  Graph g;
  Graph::Scope scope(g);
  Tensor x = Tensor::scalar(1, true);
  {
    Graph::NoGrad off;
    Tensor y = square(x);
    CHECK_FALSE(y.requires_grad());
    CHECK(g.size() == 0);
  }
  Tensor y = square(x);
  CHECK(y.requires_grad());
  CHECK(g.size() == 1);
}

TEST_CASE("non-finite forward raises") {
  Tensor big = Tensor::scalar(std::numeric_limits<Real>::max());
  CHECK_THROWS_AS(resnerf::exp(big), NumericError);
  CHECK_THROWS_AS(multiply(big, big), NumericError);
}

TEST_CASE("backward is bitwise deterministic") {
  auto run = [] {
    RngStream rng(7, "det");
    Tensor w = rand_tensor({4, 4}, rng);
    w.set_requires_grad(true);
    Tensor x = rand_tensor({4, 4}, rng);
    Graph g;
    Graph::Scope scope(g);
    Tensor y = sum_all(square(sigmoid(matmul(x, w))));
    g.backward(y);
    return std::vector<Real>(w.grad().begin(), w.grad().end());
  };
  auto a = run();
  auto b = run();
  CHECK(a == b);
}

TEST_CASE("grad_check: simple chain is tight") {
  Tensor x0 = Tensor::from_values({3}, {0.5, -0.7, 1.2});
  Real err = grad_check([](const Tensor& x) { return sum_all(square(x)); }, x0, Real(1e-2));
  CHECK(err < Real(1e-3));
}

TEST_CASE("grad_check: every op kind") {
  RngStream rng(11, "gradcheck");
  const Real step = Real(5e-3);
  // Points are kept away from relu's kink; |x| >= 0.2.
  auto kink_safe = [&rng](std::vector<int> shape) {
    Tensor t = rand_tensor(std::move(shape), rng, Real(0.2), Real(1.2));
    auto v = t.values_mut();
    for (auto& x : v) {
      if (rng.uniform() < Real(0.5)) x = -x;
    }
    return t;
  };

  for (int rep = 0; rep < 3; ++rep) {
    Tensor p23 = kink_safe({2, 3});
    Tensor c23 = rand_tensor({2, 3}, rng);
    Tensor c3 = rand_tensor({3}, rng);
    Tensor c21 = rand_tensor({2, 1}, rng);
    Tensor c32 = rand_tensor({3, 2}, rng);

    CHECK(grad_check([&](const Tensor& x) { return sum_all(matmul(x, c32)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(matmul(c32, x)); }, kink_safe({2, 3}),
                     step) < Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(add(x, c3)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(subtract(x, c21)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(subtract(c23, x)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(multiply(x, c23)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(relu(x)); }, p23, step) < Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(sigmoid(x)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(softplus(x)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(resnerf::exp(x)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(negate(x)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(square(x)); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return multiply(sum_all(x), sum_all(x)); }, p23,
                     step) < Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(square(sum_rows(x))); }, p23, step) <
          Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(square(concat_cols({x, c23}))); },
                     p23, step) < Real(1e-3));
    CHECK(grad_check(
              [&](const Tensor& x) { return sum_all(square(gather_rows(x, {1, 0, 1, 1}))); },
              p23, step) < Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(square(reshape(x, {3, 2}))); }, p23,
                     step) < Real(1e-3));
    CHECK(grad_check([&](const Tensor& x) { return sum_all(square(slice_cols(x, 1, 3))); }, p23,
                     step) < Real(1e-3));
    CHECK(grad_check(
              [&](const Tensor& x) { return sum_all(square(cumsum_exclusive_rows(x))); }, p23,
              step) < Real(1e-3));
  }
}

TEST_CASE("op_forward dispatches every kind") {
  Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from_values({2, 2}, {5, 6, 7, 8});
  CHECK(op_forward(OpKind::kAdd, {a, b}).values()[0] == Real(6));
  CHECK(op_forward(OpKind::kMatmul, {a, b}).values()[0] == Real(19));
  CHECK(op_forward(OpKind::kSumAll, {a}).item() == Real(10));
  OpAttrs attrs;
  attrs.shape = {4};
  CHECK(op_forward(OpKind::kReshape, {a}, attrs).shape() == std::vector<int>{4});
  attrs.c0 = 0;
  attrs.c1 = 1;
  CHECK(op_forward(OpKind::kSliceCols, {a}, attrs).values()[1] == Real(3));
  std::vector<std::int32_t> idx{1};
  attrs.indices = &idx;
  CHECK(op_forward(OpKind::kGatherRows, {a}, attrs).values()[0] == Real(3));
  CHECK_THROWS_AS(op_forward(OpKind::kAdd, {a}), DimensionError);
  CHECK_THROWS_AS(op_forward(OpKind::kHashEncode, {a}), Error);
}
