// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace resnerf {

namespace {

using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>>;
using CVecMap = Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>>;

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

void ensure_grad(TensorData& t) {
  if (t.grad.empty()) t.grad.assign(t.values.size(), Real(0));
}

// How the right-hand side of a binary elementwise op lines up with the left.
enum class Bcast { kSame, kScalar, kRow, kCol };

struct BinaryPlan {
  Bcast mode = Bcast::kSame;
  int rows = 0, cols = 0;  // of the full-shape side
};

bool plan_binary(const std::vector<int>& a, const std::vector<int>& b, BinaryPlan* plan) {
  if (a == b) {
    plan->mode = Bcast::kSame;
    return true;
  }
  if (shape_numel(b) == 1) {
    plan->mode = Bcast::kScalar;
    return true;
  }
  if (a.size() == 2) {
    plan->rows = a[0];
    plan->cols = a[1];
    if (b.size() == 1 && b[0] == a[1]) {
      plan->mode = Bcast::kRow;
      return true;
    }
    if (b.size() == 2 && b[0] == a[0] && b[1] == 1) {
      plan->mode = Bcast::kCol;
      return true;
    }
  }
  return false;
}

// Index of the rhs element paired with flat index i of the lhs.
inline std::int64_t rhs_index(const BinaryPlan& p, std::int64_t i) {
  switch (p.mode) {
    case Bcast::kSame: return i;
    case Bcast::kScalar: return 0;
    case Bcast::kRow: return i % p.cols;
    case Bcast::kCol: return i / p.cols;
  }
  return 0;
}

[[noreturn]] void throw_shape(OpKind kind, const std::vector<int>& a, const std::vector<int>& b) {
  throw DimensionError(std::string(op_name(kind)) + ": shapes " + shape_str(a) + " and " +
                       shape_str(b) + " do not conform");
}

bool recording_for(std::initializer_list<const Tensor*> inputs) {
  if (!Graph::active()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSubtract: return "subtract";
    case OpKind::kMultiply: return "multiply";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kSoftplus: return "softplus";
    case OpKind::kExp: return "exp";
    case OpKind::kNegate: return "negate";
    case OpKind::kSquare: return "square";
    case OpKind::kSumAll: return "sum_all";
    case OpKind::kSumRows: return "sum_rows";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kReshape: return "reshape";
    case OpKind::kSliceCols: return "slice_cols";
    case OpKind::kCumsumExclusiveRows: return "cumsum_exclusive_rows";
    case OpKind::kHashEncode: return "hash_encode";
  }
  return "?";
}

// ---- Tensor ---------------------------------------------------------------

Tensor make_tensor(std::vector<int> shape, std::vector<Real> values, bool requires_grad) {
  auto d = std::make_shared<TensorData>();
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw DimensionError("tensor: shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  d->shape = std::move(shape);
  d->values = std::move(values);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  std::vector<Real> v(static_cast<std::size_t>(shape_numel(shape)), Real(0));
  return make_tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, Real value, bool requires_grad) {
  std::vector<Real> v(static_cast<std::size_t>(shape_numel(shape)), value);
  return make_tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(Real value, bool requires_grad) {
  return make_tensor({1}, {value}, requires_grad);
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<Real> values, bool requires_grad) {
  return make_tensor(std::move(shape), std::move(values), requires_grad);
}

Real Tensor::item() const {
  if (numel() != 1) throw DimensionError("item: tensor is not scalar-shaped");
  return data_->values[0];
}

void Tensor::zero_grad() {
  ensure_grad(*data_);
  std::fill(data_->grad.begin(), data_->grad.end(), Real(0));
}

void Tensor::drop_grad() { data_->grad.clear(); data_->grad.shrink_to_fit(); }

Tensor Tensor::detached_copy() const {
  return make_tensor(data_->shape, data_->values, false);
}

// ---- Graph ----------------------------------------------------------------

void Graph::clear() {
  for (Node& n : nodes_) {
    if (n.output) {
      n.output->graph = nullptr;
      n.output->node = -1;
    }
  }
  nodes_.clear();
  ran_backward_ = false;
}

void Graph::record(OpKind kind, std::vector<std::shared_ptr<TensorData>> inputs,
                   const Tensor& output, std::function<void()> backward) {
  output.impl()->graph = this;
  output.impl()->node = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{kind, std::move(inputs), output.impl(), std::move(backward)});
}

void Graph::backward(const Tensor& root) {
  if (!root.defined() || root.numel() != 1) {
    throw DimensionError("backward: root must be scalar-shaped");
  }
  if (ran_backward_) {
    throw Error("backward: graph already traversed; rebuild the graph per step");
  }
  ran_backward_ = true;

  TensorData* rd = root.impl().get();
  ensure_grad(*rd);
  rd->grad[0] += Real(1);

  if (rd->graph != this || rd->node < 0) return;  // leaf root: nothing upstream

  // Mark nodes reachable from the root so each is visited exactly once and
  // unrelated subgraphs stay untouched.
  std::vector<char> reachable(nodes_.size(), 0);
  std::vector<int> stack{rd->node};
  reachable[static_cast<std::size_t>(rd->node)] = 1;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    for (const auto& in : nodes_[static_cast<std::size_t>(id)].inputs) {
      if (in->graph == this && in->node >= 0 && !reachable[static_cast<std::size_t>(in->node)]) {
        reachable[static_cast<std::size_t>(in->node)] = 1;
        stack.push_back(in->node);
      }
    }
  }

  for (int id = rd->node; id >= 0; --id) {
    if (reachable[static_cast<std::size_t>(id)]) nodes_[static_cast<std::size_t>(id)].backward();
  }
}

// ---- finite check ---------------------------------------------------------

void check_finite(const Tensor& t, OpKind kind) {
  const Real* p = t.values().data();
  const std::int64_t n = t.numel();
  bool ok = true;
  for (std::int64_t i = 0; i < n; ++i) ok &= std::isfinite(p[i]);
  if (!ok) {
    throw NumericError(std::string(op_name(kind)) + ": non-finite value in forward output");
  }
}

// ---- elementwise ops ------------------------------------------------------

namespace {

// Accumulate g into the rhs grad buffer, folding broadcast dimensions.
void accum_rhs(const BinaryPlan& plan, TensorData& b, std::span<const Real> contrib) {
  ensure_grad(b);
  switch (plan.mode) {
    case Bcast::kSame:
      for (std::size_t i = 0; i < contrib.size(); ++i) b.grad[i] += contrib[i];
      break;
    case Bcast::kScalar: {
      Real s = 0;
      for (Real v : contrib) s += v;
      b.grad[0] += s;
      break;
    }
    case Bcast::kRow:
      for (std::size_t i = 0; i < contrib.size(); ++i) {
        b.grad[i % static_cast<std::size_t>(plan.cols)] += contrib[i];
      }
      break;
    case Bcast::kCol:
      for (std::size_t i = 0; i < contrib.size(); ++i) {
        b.grad[i / static_cast<std::size_t>(plan.cols)] += contrib[i];
      }
      break;
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  // add is commutative: put the full-shape operand on the left.
  BinaryPlan plan;
  if (!plan_binary(a.shape(), b.shape(), &plan)) {
    BinaryPlan swapped;
    if (plan_binary(b.shape(), a.shape(), &swapped)) return add(b, a);
    throw_shape(OpKind::kAdd, a.shape(), b.shape());
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<Real> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[i] + bv[static_cast<std::size_t>(rhs_index(plan, static_cast<std::int64_t>(i)))];
  }
  bool rec = recording_for({&a, &b});
  Tensor result = make_tensor(a.shape(), std::move(out), rec);
  check_finite(result, OpKind::kAdd);
  if (rec) {
    Graph::active()->record(OpKind::kAdd, {a.impl(), b.impl()}, result,
                            [ad = a.impl(), bd = b.impl(), od = result.impl(), plan]() {
                              if (od->grad.empty()) return;
                              if (ad->requires_grad) {
                                ensure_grad(*ad);
                                for (std::size_t i = 0; i < od->grad.size(); ++i) {
                                  ad->grad[i] += od->grad[i];
                                }
                              }
                              if (bd->requires_grad) accum_rhs(plan, *bd, od->grad);
                            });
  }
  return result;
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  BinaryPlan plan;
  bool lhs_small = false;  // a is the broadcast side
  if (!plan_binary(a.shape(), b.shape(), &plan)) {
    if (plan_binary(b.shape(), a.shape(), &plan)) {
      lhs_small = true;
    } else {
      throw_shape(OpKind::kSubtract, a.shape(), b.shape());
    }
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<Real> out(lhs_small ? bv.size() : av.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto j = static_cast<std::size_t>(rhs_index(plan, static_cast<std::int64_t>(i)));
    out[i] = lhs_small ? av[j] - bv[i] : av[i] - bv[j];
  }
  bool rec = recording_for({&a, &b});
  Tensor result = make_tensor(lhs_small ? b.shape() : a.shape(), std::move(out), rec);
  check_finite(result, OpKind::kSubtract);
  if (rec) {
    Graph::active()->record(
        OpKind::kSubtract, {a.impl(), b.impl()}, result,
        [ad = a.impl(), bd = b.impl(), od = result.impl(), plan, lhs_small]() {
          if (od->grad.empty()) return;
          auto add_full = [&](TensorData& t, Real sign) {
            ensure_grad(t);
            for (std::size_t i = 0; i < od->grad.size(); ++i) t.grad[i] += sign * od->grad[i];
          };
          auto add_folded = [&](TensorData& t, Real sign) {
            std::vector<Real> contrib(od->grad.size());
            for (std::size_t i = 0; i < contrib.size(); ++i) contrib[i] = sign * od->grad[i];
            accum_rhs(plan, t, contrib);
          };
          if (ad->requires_grad) lhs_small ? add_folded(*ad, 1) : add_full(*ad, 1);
          if (bd->requires_grad) lhs_small ? add_full(*bd, -1) : add_folded(*bd, -1);
        });
  }
  return result;
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  BinaryPlan plan;
  if (!plan_binary(a.shape(), b.shape(), &plan)) {
    BinaryPlan swapped;
    if (plan_binary(b.shape(), a.shape(), &swapped)) return multiply(b, a);
    throw_shape(OpKind::kMultiply, a.shape(), b.shape());
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<Real> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[i] * bv[static_cast<std::size_t>(rhs_index(plan, static_cast<std::int64_t>(i)))];
  }
  bool rec = recording_for({&a, &b});
  Tensor result = make_tensor(a.shape(), std::move(out), rec);
  check_finite(result, OpKind::kMultiply);
  if (rec) {
    Graph::active()->record(
        OpKind::kMultiply, {a.impl(), b.impl()}, result,
        [ad = a.impl(), bd = b.impl(), od = result.impl(), plan]() {
          if (od->grad.empty()) return;
          if (ad->requires_grad) {
            ensure_grad(*ad);
            for (std::size_t i = 0; i < od->grad.size(); ++i) {
              ad->grad[i] += od->grad[i] *
                             bd->values[static_cast<std::size_t>(
                                 rhs_index(plan, static_cast<std::int64_t>(i)))];
            }
          }
          if (bd->requires_grad) {
            std::vector<Real> contrib(od->grad.size());
            for (std::size_t i = 0; i < contrib.size(); ++i) {
              contrib[i] = od->grad[i] * ad->values[i];
            }
            accum_rhs(plan, *bd, contrib);
          }
        });
  }
  return result;
}

namespace {

template <typename Fwd, typename Bwd>
Tensor unary_op(OpKind kind, const Tensor& x, Fwd fwd, Bwd bwd) {
  const auto xv = x.values();
  std::vector<Real> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  bool rec = recording_for({&x});
  Tensor result = make_tensor(x.shape(), std::move(out), rec);
  check_finite(result, kind);
  if (rec) {
    Graph::active()->record(kind, {x.impl()}, result,
                            [xd = x.impl(), od = result.impl(), bwd]() {
                              if (od->grad.empty() || !xd->requires_grad) return;
                              ensure_grad(*xd);
                              for (std::size_t i = 0; i < od->grad.size(); ++i) {
                                xd->grad[i] += od->grad[i] * bwd(xd->values[i], od->values[i]);
                              }
                            });
  }
  return result;
}

}  // namespace

Real sigmoid_scalar(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

Real softplus_scalar(Real x) {
  return std::max(x, Real(0)) + std::log1p(std::exp(-std::abs(x)));
}

Tensor relu(const Tensor& x) {
  return unary_op(
      OpKind::kRelu, x, [](Real v) { return v > Real(0) ? v : Real(0); },
      [](Real v, Real) { return v > Real(0) ? Real(1) : Real(0); });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      OpKind::kSigmoid, x, [](Real v) { return sigmoid_scalar(v); },
      [](Real, Real s) { return s * (Real(1) - s); });
}

Tensor softplus(const Tensor& x) {
  return unary_op(
      OpKind::kSoftplus, x, [](Real v) { return softplus_scalar(v); },
      [](Real v, Real) { return sigmoid_scalar(v); });
}

Tensor exp(const Tensor& x) {
  return unary_op(
      OpKind::kExp, x, [](Real v) { return std::exp(v); },
      [](Real, Real e) { return e; });
}

Tensor negate(const Tensor& x) {
  return unary_op(
      OpKind::kNegate, x, [](Real v) { return -v; }, [](Real, Real) { return Real(-1); });
}

Tensor square(const Tensor& x) {
  return unary_op(
      OpKind::kSquare, x, [](Real v) { return v * v; },
      [](Real v, Real) { return Real(2) * v; });
}

// ---- matmul ---------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) throw_shape(OpKind::kMatmul, a.shape(), b.shape());
  const int n = a.dim(0), k = a.dim(1);
  const bool vec_rhs = b.rank() == 1;
  const int m = vec_rhs ? 1 : (b.rank() == 2 ? b.dim(1) : -1);
  if (m < 0 || b.dim(0) != k) throw_shape(OpKind::kMatmul, a.shape(), b.shape());

  std::vector<Real> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  {
    CMatMap A(a.values().data(), n, k);
    CMatMap B(b.values().data(), k, m);
    MatMap C(out.data(), n, m);
    C.noalias() = A * B;
  }
  bool rec = recording_for({&a, &b});
  Tensor result = make_tensor(vec_rhs ? std::vector<int>{n} : std::vector<int>{n, m},
                              std::move(out), rec);
  check_finite(result, OpKind::kMatmul);
  if (rec) {
    Graph::active()->record(
        OpKind::kMatmul, {a.impl(), b.impl()}, result,
        [ad = a.impl(), bd = b.impl(), od = result.impl(), n, k, m]() {
          if (od->grad.empty()) return;
          CMatMap G(od->grad.data(), n, m);
          if (ad->requires_grad) {
            ensure_grad(*ad);
            CMatMap B(bd->values.data(), k, m);
            MatMap GA(ad->grad.data(), n, k);
            GA.noalias() += G * B.transpose();
          }
          if (bd->requires_grad) {
            ensure_grad(*bd);
            CMatMap A(ad->values.data(), n, k);
            MatMap GB(bd->grad.data(), k, m);
            GB.noalias() += A.transpose() * G;
          }
        });
  }
  return result;
}

// ---- reductions & layout ops ----------------------------------------------

Tensor sum_all(const Tensor& x) {
  Real s = 0;
  for (Real v : x.values()) s += v;
  bool rec = recording_for({&x});
  Tensor result = make_tensor({1}, {s}, rec);
  check_finite(result, OpKind::kSumAll);
  if (rec) {
    Graph::active()->record(OpKind::kSumAll, {x.impl()}, result,
                            [xd = x.impl(), od = result.impl()]() {
                              if (od->grad.empty() || !xd->requires_grad) return;
                              ensure_grad(*xd);
                              const Real g = od->grad[0];
                              for (Real& v : xd->grad) v += g;
                            });
  }
  return result;
}

Tensor sum_rows(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("sum_rows: expected rank-2 input");
  const int n = x.dim(0), c = x.dim(1);
  std::vector<Real> out(static_cast<std::size_t>(n));
  const Real* p = x.values().data();
  for (int i = 0; i < n; ++i) {
    Real s = 0;
    for (int j = 0; j < c; ++j) s += p[static_cast<std::size_t>(i) * c + j];
    out[static_cast<std::size_t>(i)] = s;
  }
  bool rec = recording_for({&x});
  Tensor result = make_tensor({n, 1}, std::move(out), rec);
  check_finite(result, OpKind::kSumRows);
  if (rec) {
    Graph::active()->record(OpKind::kSumRows, {x.impl()}, result,
                            [xd = x.impl(), od = result.impl(), n, c]() {
                              if (od->grad.empty() || !xd->requires_grad) return;
                              ensure_grad(*xd);
                              for (int i = 0; i < n; ++i) {
                                const Real g = od->grad[static_cast<std::size_t>(i)];
                                Real* row = xd->grad.data() + static_cast<std::size_t>(i) * c;
                                for (int j = 0; j < c; ++j) row[j] += g;
                              }
                            });
  }
  return result;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const int n = parts[0].rank() == 2 ? parts[0].dim(0) : -1;
  if (n < 0) throw DimensionError("concat_cols: expected rank-2 inputs");
  int total = 0;
  for (const Tensor& t : parts) {
    if (t.rank() != 2 || t.dim(0) != n) {
      throw DimensionError("concat_cols: row counts differ");
    }
    total += t.dim(1);
  }
  std::vector<Real> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(total));
  int col = 0;
  for (const Tensor& t : parts) {
    const int c = t.dim(1);
    const Real* src = t.values().data();
    for (int i = 0; i < n; ++i) {
      std::memcpy(out.data() + static_cast<std::size_t>(i) * total + col,
                  src + static_cast<std::size_t>(i) * c, sizeof(Real) * static_cast<std::size_t>(c));
    }
    col += c;
  }
  bool rec = false;
  if (Graph::active()) {
    for (const Tensor& t : parts) rec = rec || t.requires_grad();
  }
  Tensor result = make_tensor({n, total}, std::move(out), rec);
  check_finite(result, OpKind::kConcatCols);
  if (rec) {
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::vector<int> widths;
    for (const Tensor& t : parts) {
      inputs.push_back(t.impl());
      widths.push_back(t.dim(1));
    }
    Graph::active()->record(OpKind::kConcatCols, inputs, result,
                            [inputs, widths, od = result.impl(), n, total]() {
                              if (od->grad.empty()) return;
                              int col = 0;
                              for (std::size_t p = 0; p < inputs.size(); ++p) {
                                const int c = widths[p];
                                if (inputs[p]->requires_grad) {
                                  ensure_grad(*inputs[p]);
                                  for (int i = 0; i < n; ++i) {
                                    const Real* g = od->grad.data() +
                                                    static_cast<std::size_t>(i) * total + col;
                                    Real* dst = inputs[p]->grad.data() +
                                                static_cast<std::size_t>(i) * c;
                                    for (int j = 0; j < c; ++j) dst[j] += g[j];
                                  }
                                }
                                col += c;
                              }
                            });
  }
  return result;
}

Tensor gather_rows(const Tensor& table, const std::vector<std::int32_t>& indices) {
  if (table.rank() != 2) throw DimensionError("gather_rows: table must be rank-2");
  const int rows = table.dim(0), f = table.dim(1);
  for (std::int32_t idx : indices) {
    if (idx < 0 || idx >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(idx) + " out of range [0," +
                           std::to_string(rows) + ")");
    }
  }
  const int p = static_cast<int>(indices.size());
  std::vector<Real> out(static_cast<std::size_t>(p) * static_cast<std::size_t>(f));
  const Real* src = table.values().data();
  for (int i = 0; i < p; ++i) {
    std::memcpy(out.data() + static_cast<std::size_t>(i) * f,
                src + static_cast<std::size_t>(indices[static_cast<std::size_t>(i)]) * f,
                sizeof(Real) * static_cast<std::size_t>(f));
  }
  bool rec = recording_for({&table});
  Tensor result = make_tensor({p, f}, std::move(out), rec);
  check_finite(result, OpKind::kGatherRows);
  if (rec) {
    Graph::active()->record(OpKind::kGatherRows, {table.impl()}, result,
                            [td = table.impl(), od = result.impl(), indices, f]() {
                              if (od->grad.empty() || !td->requires_grad) return;
                              ensure_grad(*td);
                              // Scatter-add is serialized so repeated indices
                              // accumulate deterministically.
                              for (std::size_t i = 0; i < indices.size(); ++i) {
                                const Real* g = od->grad.data() + i * static_cast<std::size_t>(f);
                                Real* dst = td->grad.data() +
                                            static_cast<std::size_t>(indices[i]) *
                                                static_cast<std::size_t>(f);
                                for (int j = 0; j < f; ++j) dst[j] += g[j];
                              }
                            });
  }
  return result;
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: new shape " + shape_str(shape) + " has wrong element count");
  }
  bool rec = recording_for({&x});
  std::vector<Real> out(x.values().begin(), x.values().end());
  Tensor result = make_tensor(std::move(shape), std::move(out), rec);
  if (rec) {
    Graph::active()->record(OpKind::kReshape, {x.impl()}, result,
                            [xd = x.impl(), od = result.impl()]() {
                              if (od->grad.empty() || !xd->requires_grad) return;
                              ensure_grad(*xd);
                              for (std::size_t i = 0; i < od->grad.size(); ++i) {
                                xd->grad[i] += od->grad[i];
                              }
                            });
  }
  return result;
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
  if (x.rank() != 2) throw DimensionError("slice_cols: expected rank-2 input");
  const int n = x.dim(0), c = x.dim(1);
  if (c0 < 0 || c1 > c || c0 >= c1) {
    throw DimensionError("slice_cols: range [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") invalid for " + std::to_string(c) + " columns");
  }
  const int w = c1 - c0;
  std::vector<Real> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(w));
  const Real* src = x.values().data();
  for (int i = 0; i < n; ++i) {
    std::memcpy(out.data() + static_cast<std::size_t>(i) * w,
                src + static_cast<std::size_t>(i) * c + c0,
                sizeof(Real) * static_cast<std::size_t>(w));
  }
  bool rec = recording_for({&x});
  Tensor result = make_tensor({n, w}, std::move(out), rec);
  if (rec) {
    Graph::active()->record(OpKind::kSliceCols, {x.impl()}, result,
                            [xd = x.impl(), od = result.impl(), n, c, c0, w]() {
                              if (od->grad.empty() || !xd->requires_grad) return;
                              ensure_grad(*xd);
                              for (int i = 0; i < n; ++i) {
                                const Real* g = od->grad.data() + static_cast<std::size_t>(i) * w;
                                Real* dst = xd->grad.data() + static_cast<std::size_t>(i) * c + c0;
                                for (int j = 0; j < w; ++j) dst[j] += g[j];
                              }
                            });
  }
  return result;
}

Tensor cumsum_exclusive_rows(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("cumsum_exclusive_rows: expected rank-2 input");
  const int n = x.dim(0), s = x.dim(1);
  std::vector<Real> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(s));
  const Real* p = x.values().data();
  for (int i = 0; i < n; ++i) {
    Real acc = 0;
    for (int j = 0; j < s; ++j) {
      out[static_cast<std::size_t>(i) * s + j] = acc;
      acc += p[static_cast<std::size_t>(i) * s + j];
    }
  }
  bool rec = recording_for({&x});
  Tensor result = make_tensor({n, s}, std::move(out), rec);
  check_finite(result, OpKind::kCumsumExclusiveRows);
  if (rec) {
    Graph::active()->record(OpKind::kCumsumExclusiveRows, {x.impl()}, result,
                            [xd = x.impl(), od = result.impl(), n, s]() {
                              if (od->grad.empty() || !xd->requires_grad) return;
                              ensure_grad(*xd);
                              // d out[i,j'] / d x[i,j] = 1 for j' > j, so the input grad
                              // is a reversed exclusive suffix sum of the output grad.
                              for (int i = 0; i < n; ++i) {
                                Real acc = 0;
                                const Real* g = od->grad.data() + static_cast<std::size_t>(i) * s;
                                Real* dst = xd->grad.data() + static_cast<std::size_t>(i) * s;
                                for (int j = s - 1; j >= 0; --j) {
                                  dst[j] += acc;
                                  acc += g[j];
                                }
                              }
                            });
  }
  return result;
}

// ---- generic dispatch -----------------------------------------------------

Tensor op_forward(OpKind kind, const std::vector<Tensor>& inputs, const OpAttrs& attrs) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw DimensionError(std::string(op_name(kind)) + ": expected " + std::to_string(n) +
                           " inputs, got " + std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::kMatmul: need(2); return matmul(inputs[0], inputs[1]);
    case OpKind::kAdd: need(2); return add(inputs[0], inputs[1]);
    case OpKind::kSubtract: need(2); return subtract(inputs[0], inputs[1]);
    case OpKind::kMultiply: need(2); return multiply(inputs[0], inputs[1]);
    case OpKind::kRelu: need(1); return relu(inputs[0]);
    case OpKind::kSigmoid: need(1); return sigmoid(inputs[0]);
    case OpKind::kSoftplus: need(1); return softplus(inputs[0]);
    case OpKind::kExp: need(1); return exp(inputs[0]);
    case OpKind::kNegate: need(1); return negate(inputs[0]);
    case OpKind::kSquare: need(1); return square(inputs[0]);
    case OpKind::kSumAll: need(1); return sum_all(inputs[0]);
    case OpKind::kSumRows: need(1); return sum_rows(inputs[0]);
    case OpKind::kConcatCols: return concat_cols(inputs);
    case OpKind::kGatherRows:
      need(1);
      if (!attrs.indices) throw DimensionError("gather_rows: missing indices attribute");
      return gather_rows(inputs[0], *attrs.indices);
    case OpKind::kReshape: need(1); return reshape(inputs[0], attrs.shape);
    case OpKind::kSliceCols: need(1); return slice_cols(inputs[0], attrs.c0, attrs.c1);
    case OpKind::kCumsumExclusiveRows: need(1); return cumsum_exclusive_rows(inputs[0]);
    case OpKind::kHashEncode:
      throw Error("hash_encode nodes are recorded by the encodings module");
  }
  throw Error("op_forward: unknown op kind");
}

// ---- gradient check -------------------------------------------------------

Real grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& point,
                Real step) {
  if (step <= Real(0)) throw Error("grad_check: step must be positive");
  Tensor x = point.detached_copy();
  x.set_requires_grad(true);

  Graph graph;
  {
    Graph::Scope scope(graph);
    Tensor y = fn(x);
    if (y.numel() != 1) throw DimensionError("grad_check: function must be scalar-valued");
    graph.backward(y);
  }
  std::vector<Real> analytic(static_cast<std::size_t>(x.numel()), Real(0));
  if (x.has_grad()) {
    std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
  }

  auto eval = [&fn](const Tensor& t) -> double {
    Graph::NoGrad guard;
    return static_cast<double>(fn(t).item());
  };

  double max_err = 0;
  auto vals = x.values_mut();
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const Real orig = vals[static_cast<std::size_t>(i)];
    vals[static_cast<std::size_t>(i)] = orig + step;
    const double fp = eval(x);
    vals[static_cast<std::size_t>(i)] = orig - step;
    const double fm = eval(x);
    vals[static_cast<std::size_t>(i)] = orig;
    const double numeric = (fp - fm) / (2.0 * static_cast<double>(step));
    const double a = static_cast<double>(analytic[static_cast<std::size_t>(i)]);
    const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
    max_err = std::max(max_err, err);
  }
  return static_cast<Real>(max_err);
}

}  // namespace resnerf
