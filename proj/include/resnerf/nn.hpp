// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "resnerf/rng.hpp"
#include "resnerf/tensor.hpp"

namespace resnerf {

/// Affine map x[N,in] -> x·W + b with W [in,out], b [out].
/// Weights are Xavier-uniform, biases zero, so a fresh network emits zeros.
struct LinearLayer {
  Tensor weight;
  Tensor bias;

  static LinearLayer create(int in, int out, RngStream& rng);
  Tensor forward(const Tensor& x) const;

  int in_dim() const { return weight.dim(0); }
  int out_dim() const { return weight.dim(1); }
};

/// Stack of LinearLayers with relu between them; relu after the final layer
/// is optional (trunks keep it, output heads do not).
class Mlp {
 public:
  Mlp() = default;
  static Mlp create(int in, const std::vector<int>& widths, bool relu_on_output,
                    RngStream& rng);

  Tensor forward(const Tensor& x) const;

  const std::vector<LinearLayer>& layers() const { return layers_; }
  std::vector<LinearLayer>& layers() { return layers_; }
  int out_dim() const { return layers_.back().out_dim(); }

  /// Parameters as (name, tensor) pairs: "<prefix>.<i>.weight" / ".bias".
  void collect_parameters(const std::string& prefix,
                          std::vector<std::pair<std::string, Tensor>>* out) const;

 private:
  std::vector<LinearLayer> layers_;
  bool relu_on_output_ = false;
};

}  // namespace resnerf
