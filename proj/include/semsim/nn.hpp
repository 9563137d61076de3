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

// Small feedforward networks trained by backpropagation.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace semsim::nn {

/// Fully connected layer; weights stored in x out, row-major.
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

/// Rectified hidden layers, linear output layer.
class Mlp {
 public:
  struct Cache {
    int batch = 0;
    /// activations[0] is the input; activations[l + 1] is the output of layer l.
    std::vector<std::vector<double>> activations;
  };

  Mlp() = default;
  /// sizes = {input, hidden..., output}. Uniform(+-1/sqrt(fan_in)) initialization.
  Mlp(const std::vector<int>& sizes, std::mt19937_64& rng);

  int input_size() const { return layers_.front().in; }
  int output_size() const { return layers_.back().out; }
  std::vector<int> sizes() const;

  const std::vector<double>& forward(std::span<const double> input, int batch, Cache& cache) const;
  std::vector<double> predict(std::span<const double> input, int batch) const;

  /// Overwrites `grads` with dLoss/dParams given dLoss/dOutput.
  void backward(const Cache& cache, std::span<const double> output_grad, Gradients& grads) const;
  Gradients zero_gradients() const;

  /// this = tau * source + (1 - tau) * this. Throws on shape mismatch.
  void blend_from(const Mlp& source, double tau);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<DenseLayer> layers_;
};

/// Adam with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Mlp& net, const Gradients& grads);
  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  Gradients m_, v_;
};

/// Adam on a single scalar parameter.
class ScalarAdam {
 public:
  explicit ScalarAdam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(double& param, double grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  double m_ = 0.0, v_ = 0.0;
};

}  // namespace semsim::nn
