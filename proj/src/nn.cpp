// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/nn.hpp"

#include <cmath>

namespace resnerf {

LinearLayer LinearLayer::create(int in, int out, RngStream& rng) {
  const Real limit = std::sqrt(Real(6) / Real(in + out));
  std::vector<Real> w(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
  for (Real& v : w) v = rng.uniform(-limit, limit);
  LinearLayer layer;
  layer.weight = make_tensor({in, out}, std::move(w), true);
  layer.bias = Tensor::zeros({out}, true);
  return layer;
}

Tensor LinearLayer::forward(const Tensor& x) const {
  return add(matmul(x, weight), bias);
}

Mlp Mlp::create(int in, const std::vector<int>& widths, bool relu_on_output, RngStream& rng) {
  Mlp mlp;
  mlp.relu_on_output_ = relu_on_output;
  int d = in;
  for (int w : widths) {
    mlp.layers_.push_back(LinearLayer::create(d, w, rng));
    d = w;
  }
  return mlp;
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size() || relu_on_output_) h = relu(h);
  }
  return h;
}

void Mlp::collect_parameters(const std::string& prefix,
                             std::vector<std::pair<std::string, Tensor>>* out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out->emplace_back(prefix + "." + std::to_string(i) + ".weight", layers_[i].weight);
    out->emplace_back(prefix + "." + std::to_string(i) + ".bias", layers_[i].bias);
  }
}

}  // namespace resnerf
