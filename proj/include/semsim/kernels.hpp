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

// Data-parallel inner loops used by the simulator and the learner.
//
// Every kernel has an OpenMP version (namespace kernels) and a serial
// reference (namespace kernels::reference) kept for tests and benchmarks.
// Each output element is produced by exactly one thread with a fixed
// accumulation order, so results do not depend on the thread count.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace semsim {
struct FadingParams;
}

namespace semsim::kernels {

/// Row-major matrix view: rows x cols, element (r, c) at data[r * cols + c].
struct MatrixView {
  const double* data;
  int rows;
  int cols;
};
struct MutableMatrixView {
  double* data;
  int rows;
  int cols;
};

/// 5x5 joint histogram of (real, predicted) pixel values; out[r * 5 + p].
void joint_class_histogram(std::span<const std::uint8_t> real, std::span<const std::uint8_t> predicted,
                           std::span<std::int64_t, 25> out);

/// y = x * w + bias, optionally rectified. x: batch x in, w: in x out, y: batch x out.
void dense_forward(MatrixView x, MatrixView w, std::span<const double> bias, MutableMatrixView y, bool relu);

/// dw = x^T * dy, db = column sums of dy (overwrites).
void dense_backward_params(MatrixView x, MatrixView dy, MutableMatrixView dw, std::span<double> db);

/// dx = dy * w^T (overwrites).
void dense_backward_input(MatrixView dy, MatrixView w, MutableMatrixView dx);

/// Sum of 1/g over `draws` fading samples, split into fixed-size chunks with
/// one seeded stream per chunk.
double sum_inverse_gain(const FadingParams& params, std::size_t draws, std::uint64_t seed);

inline constexpr std::size_t kMonteCarloChunk = 1 << 16;

namespace reference {
void joint_class_histogram(std::span<const std::uint8_t> real, std::span<const std::uint8_t> predicted,
                           std::span<std::int64_t, 25> out);
void dense_forward(MatrixView x, MatrixView w, std::span<const double> bias, MutableMatrixView y, bool relu);
void dense_backward_params(MatrixView x, MatrixView dy, MutableMatrixView dw, std::span<double> db);
void dense_backward_input(MatrixView dy, MatrixView w, MutableMatrixView dx);
double sum_inverse_gain(const FadingParams& params, std::size_t draws, std::uint64_t seed);
}  // namespace reference

}  // namespace semsim::kernels
