// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "resnerf/common.hpp"
#include "resnerf/errors.hpp"

namespace resnerf {

// Operation kinds recorded on the graph. Everything a field, encoding, or the
// rendering quadrature needs; each kind has a matching backward rule and is
// covered by the gradient-check suite.
enum class OpKind {
  kMatmul,
  kAdd,
  kSubtract,
  kMultiply,
  kRelu,
  kSigmoid,
  kSoftplus,
  kExp,
  kNegate,
  kSquare,
  kSumAll,
  kSumRows,
  kConcatCols,
  kGatherRows,
  kReshape,
  kSliceCols,
  kCumsumExclusiveRows,
  kHashEncode,  // fused multi-level grid interpolation, recorded by encodings
};

const char* op_name(OpKind kind);

class Graph;

/// Shared storage behind a Tensor handle. Values are immutable once a tensor
/// has been consumed by an op in the current step; the grad buffer is the one
/// mutable part, and parameter values may be rewritten between steps by the
/// optimizer.
struct TensorData {
  std::vector<int> shape;
  std::vector<Real> values;
  std::vector<Real> grad;  // empty until backward touches this tensor
  bool requires_grad = false;
  Graph* graph = nullptr;  // graph that produced this tensor, if any
  int node = -1;           // producing node index on `graph`
};

/// Dense row-major tensor participating in reverse-mode differentiation.
/// Value-semantic handle to shared storage; copying a Tensor aliases it.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, Real value, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<Real> values,
                            bool requires_grad = false);

  bool defined() const { return data_ != nullptr; }
  const std::vector<int>& shape() const { return data_->shape; }
  int rank() const { return static_cast<int>(data_->shape.size()); }
  int dim(int i) const { return data_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_->values.size()); }

  std::span<const Real> values() const { return data_->values; }
  /// Mutable access for optimizers and test setup. Must not be used on
  /// tensors that already sit on a live graph.
  std::span<Real> values_mut() { return data_->values; }

  /// Value of the single element of a scalar-shaped tensor.
  Real item() const;

  bool requires_grad() const { return data_->requires_grad; }
  void set_requires_grad(bool rg) { data_->requires_grad = rg; }

  bool has_grad() const { return data_ && !data_->grad.empty(); }
  std::span<const Real> grad() const { return data_->grad; }
  std::span<Real> grad_mut() { return data_->grad; }
  /// Allocates (if needed) and zeroes the grad buffer.
  void zero_grad();
  /// Releases the grad buffer entirely.
  void drop_grad();

  /// Deep copy with no graph attachment and requires_grad off.
  Tensor detached_copy() const;

  const std::shared_ptr<TensorData>& impl() const { return data_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData> d) : data_(std::move(d)) {}
  friend Tensor make_tensor(std::vector<int>, std::vector<Real>, bool);

  std::shared_ptr<TensorData> data_;
};

Tensor make_tensor(std::vector<int> shape, std::vector<Real> values, bool requires_grad);

/// Define-by-run tape. Ops record a node whenever a graph is active and the
/// op output requires grad; backward() then walks the nodes reachable from a
/// scalar root exactly once, in reverse topological (= recording) order, and
/// accumulates gradients additively.
class Graph {
 public:
  struct Node {
    OpKind kind;
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::shared_ptr<TensorData> output;
    std::function<void()> backward;
  };

  Graph() = default;
  ~Graph() { clear(); }
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  int size() const { return static_cast<int>(nodes_.size()); }
  void clear();

  /// Populates grad on every requires_grad tensor reachable from root.
  /// root must be scalar-shaped.
  void backward(const Tensor& root);

  void record(OpKind kind, std::vector<std::shared_ptr<TensorData>> inputs,
              const Tensor& output, std::function<void()> backward);

  static Graph* active() { return active_; }

  /// RAII: makes a graph the recording target for the current scope.
  class Scope {
   public:
    explicit Scope(Graph& g) : prev_(active_) { active_ = &g; }
    ~Scope() { active_ = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Graph* prev_;
  };

  /// RAII: disables recording (frozen fields, inference rendering).
  class NoGrad {
   public:
    NoGrad() : prev_(active_) { active_ = nullptr; }
    ~NoGrad() { active_ = prev_; }
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;

   private:
    Graph* prev_;
  };

 private:
  std::vector<Node> nodes_;
  bool ran_backward_ = false;
  inline static thread_local Graph* active_ = nullptr;
};

// ---- Ops ------------------------------------------------------------------
// Binary elementwise ops accept equal shapes plus three broadcast forms on
// either side: scalar [1], row vector [C] against [N,C], and column [N,1]
// against [N,C].

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor negate(const Tensor& x);
Tensor square(const Tensor& x);
Tensor sum_all(const Tensor& x);              // -> [1]
Tensor sum_rows(const Tensor& x);             // [N,C] -> [N,1]
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor gather_rows(const Tensor& table, const std::vector<std::int32_t>& indices);
Tensor reshape(const Tensor& x, std::vector<int> shape);
Tensor slice_cols(const Tensor& x, int c0, int c1);
Tensor cumsum_exclusive_rows(const Tensor& x);  // [N,S] -> [N,S]

Real sigmoid_scalar(Real x);
Real softplus_scalar(Real x);

/// Attribute block for the generic dispatcher.
struct OpAttrs {
  std::vector<int> shape;                          // reshape
  int c0 = 0, c1 = 0;                              // slice_cols
  const std::vector<std::int32_t>* indices = nullptr;  // gather_rows
};

/// Generic entry point: applies one registered op kind to its inputs.
/// kHashEncode is recorded by the encodings module and cannot be dispatched
/// from here.
Tensor op_forward(OpKind kind, const std::vector<Tensor>& inputs, const OpAttrs& attrs = {});

/// Central-difference check of a scalar-valued map at `point`.
/// Returns max over coordinates of |analytic - numeric| / max(1, |analytic|).
Real grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& point,
                Real step);

/// Throws NumericError if any element of `t` is NaN or Inf.
void check_finite(const Tensor& t, OpKind kind);

}  // namespace resnerf
