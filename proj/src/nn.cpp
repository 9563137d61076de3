// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The semsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "semsim/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "semsim/kernels.hpp"

namespace semsim::nn {

Mlp::Mlp(const std::vector<int>& sizes, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("an MLP needs at least an input and an output size");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    if (layer.in <= 0 || layer.out <= 0) throw std::invalid_argument("layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> init(-bound, bound);
    layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.bias.resize(static_cast<std::size_t>(layer.out));
    for (auto& w : layer.weights) w = init(rng);
    for (auto& b : layer.bias) b = init(rng);
    layers_.push_back(std::move(layer));
  }
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  if (layers_.empty()) return s;
  s.push_back(layers_.front().in);
  for (const auto& l : layers_) s.push_back(l.out);
  return s;
}

const std::vector<double>& Mlp::forward(std::span<const double> input, int batch, Cache& cache) const {
  if (input.size() != static_cast<std::size_t>(batch) * input_size()) {
    throw std::invalid_argument("input size does not match batch x input width");
  }
  cache.batch = batch;
  cache.activations.resize(layers_.size() + 1);
  cache.activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    auto& y = cache.activations[l + 1];
    y.resize(static_cast<std::size_t>(batch) * layer.out);
    const bool hidden = l + 1 < layers_.size();
    kernels::dense_forward({cache.activations[l].data(), batch, layer.in}, {layer.weights.data(), layer.in, layer.out},
                           layer.bias, {y.data(), batch, layer.out}, hidden);
  }
  return cache.activations.back();
}

std::vector<double> Mlp::predict(std::span<const double> input, int batch) const {
  Cache cache;
  return forward(input, batch, cache);
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void Mlp::backward(const Cache& cache, std::span<const double> output_grad, Gradients& grads) const {
  const int batch = cache.batch;
  if (grads.weights.size() != layers_.size()) grads = zero_gradients();
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> next;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& layer = layers_[li];
    const auto& x = cache.activations[li];
    kernels::dense_backward_params({x.data(), batch, layer.in}, {delta.data(), batch, layer.out},
                                   {grads.weights[li].data(), layer.in, layer.out}, grads.bias[li]);
    if (li == 0) break;
    next.resize(static_cast<std::size_t>(batch) * layer.in);
    kernels::dense_backward_input({delta.data(), batch, layer.out}, {layer.weights.data(), layer.in, layer.out},
                                  {next.data(), batch, layer.in});
    // x is the rectified output of the previous layer: gate by its sign.
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (x[i] <= 0.0) next[i] = 0.0;
    }
    delta.swap(next);
  }
}

void Mlp::blend_from(const Mlp& source, double tau) {
  if (source.sizes() != sizes()) throw std::invalid_argument("soft update between networks of different shapes");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& dst = layers_[l];
    const auto& src = source.layers_[l];
    for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights[i] = tau * src.weights[i] + (1.0 - tau) * dst.weights[i];
    for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] = tau * src.bias[i] + (1.0 - tau) * dst.bias[i];
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    const auto& x = a.layers_[l];
    const auto& y = b.layers_[l];
    if (x.in != y.in || x.out != y.out || x.weights != y.weights || x.bias != y.bias) return false;
  }
  return true;
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(Mlp& net, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  };
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grads.weights[l], m_.weights[l], v_.weights[l]);
    update(layers[l].bias, grads.bias[l], m_.bias[l], v_.bias[l]);
  }
}

void ScalarAdam::step(double& param, double grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad * grad;
  const double mh = m_ / (1.0 - std::pow(beta1_, static_cast<double>(t_)));
  const double vh = v_ / (1.0 - std::pow(beta2_, static_cast<double>(t_)));
  param -= lr_ * mh / (std::sqrt(vh) + eps_);
}

}  // namespace semsim::nn
