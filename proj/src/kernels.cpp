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

#include "semsim/kernels.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "semsim/channel.hpp"

namespace semsim::kernels {

namespace {

double chunk_inverse_gain(const FadingParams& params, std::size_t begin, std::size_t end, std::uint64_t seed,
                          std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::mt19937_64 rng(seq);
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += 1.0 / sample_gain(params, rng);
  return s;
}

}  // namespace

void joint_class_histogram(std::span<const std::uint8_t> real, std::span<const std::uint8_t> predicted,
                           std::span<std::int64_t, 25> out) {
  std::fill(out.begin(), out.end(), 0);
  const std::int64_t n = static_cast<std::int64_t>(std::min(real.size(), predicted.size()));
  const std::uint8_t* r = real.data();
  const std::uint8_t* p = predicted.data();
  std::int64_t* h = out.data();
#pragma omp parallel for reduction(+ : h[:25]) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) h[r[i] * 5 + p[i]] += 1;
}

namespace {

// c[r][j] = init[j] + sum_k a(r, k) * b[k][j], k ascending, with a(r, k) at
// a[r * a_row + k * a_col]; b: k x n, c: m x n. Rows are split across threads,
// each thread owning whole output rows.
void accumulate_product(const double* a, std::ptrdiff_t a_row, std::ptrdiff_t a_col, int m, int k, const double* b,
                        int n, const double* init, double* c, bool relu) {
  constexpr int kRows = 4;
  constexpr int kCols = 16;
#pragma omp parallel for schedule(static)
  for (int r0 = 0; r0 < m; r0 += kRows) {
    const int rows = std::min(kRows, m - r0);
    for (int n0 = 0; n0 < n; n0 += kCols) {
      const int cols = std::min(kCols, n - n0);
      double acc[kRows][kCols];
      for (int r = 0; r < kRows; ++r) {
        for (int j = 0; j < kCols; ++j) acc[r][j] = init && j < cols ? init[n0 + j] : 0.0;
      }
      if (rows == kRows && cols == kCols) {
        for (int kk = 0; kk < k; ++kk) {
          const double* brow = b + static_cast<std::ptrdiff_t>(kk) * n + n0;
          for (int r = 0; r < kRows; ++r) {
            const double av = a[(r0 + r) * a_row + kk * a_col];
#pragma omp simd
            for (int j = 0; j < kCols; ++j) acc[r][j] += av * brow[j];
          }
        }
      } else {
        for (int kk = 0; kk < k; ++kk) {
          const double* brow = b + static_cast<std::ptrdiff_t>(kk) * n + n0;
          for (int r = 0; r < rows; ++r) {
            const double av = a[(r0 + r) * a_row + kk * a_col];
            for (int j = 0; j < cols; ++j) acc[r][j] += av * brow[j];
          }
        }
      }
      for (int r = 0; r < rows; ++r) {
        double* crow = c + static_cast<std::ptrdiff_t>(r0 + r) * n + n0;
        for (int j = 0; j < cols; ++j) crow[j] = relu && acc[r][j] < 0.0 ? 0.0 : acc[r][j];
      }
    }
  }
}

std::vector<double> transpose(const double* a, int rows, int cols) {
  std::vector<double> t(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) t[static_cast<std::size_t>(c) * rows + r] = a[static_cast<std::size_t>(r) * cols + c];
  }
  return t;
}

}  // namespace

void dense_forward(MatrixView x, MatrixView w, std::span<const double> bias, MutableMatrixView y, bool relu) {
  accumulate_product(x.data, x.cols, 1, x.rows, x.cols, w.data, w.cols, bias.data(), y.data, relu);
}

void dense_backward_params(MatrixView x, MatrixView dy, MutableMatrixView dw, std::span<double> db) {
  accumulate_product(x.data, 1, x.cols, x.cols, x.rows, dy.data, dy.cols, nullptr, dw.data, false);
  std::fill(db.begin(), db.end(), 0.0);
  for (int b = 0; b < dy.rows; ++b) {
    const double* dyr = dy.data + static_cast<std::ptrdiff_t>(b) * dy.cols;
    for (int o = 0; o < dy.cols; ++o) db[o] += dyr[o];
  }
}

void dense_backward_input(MatrixView dy, MatrixView w, MutableMatrixView dx) {
  const auto wt = transpose(w.data, w.rows, w.cols);
  accumulate_product(dy.data, dy.cols, 1, dy.rows, dy.cols, wt.data(), w.rows, nullptr, dx.data, false);
}

double sum_inverse_gain(const FadingParams& params, std::size_t draws, std::uint64_t seed) {
  const std::size_t chunks = (draws + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kMonteCarloChunk;
    const std::size_t end = std::min(draws, begin + kMonteCarloChunk);
    partial[static_cast<std::size_t>(c)] = chunk_inverse_gain(params, begin, end, seed, static_cast<std::size_t>(c));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

namespace reference {

void joint_class_histogram(std::span<const std::uint8_t> real, std::span<const std::uint8_t> predicted,
                           std::span<std::int64_t, 25> out) {
  std::fill(out.begin(), out.end(), 0);
  const std::size_t n = std::min(real.size(), predicted.size());
  for (std::size_t i = 0; i < n; ++i) out[real[i] * 5u + predicted[i]] += 1;
}

void dense_forward(MatrixView x, MatrixView w, std::span<const double> bias, MutableMatrixView y, bool relu) {
  for (int b = 0; b < x.rows; ++b) {
    for (int o = 0; o < w.cols; ++o) {
      double s = bias[o];
      for (int i = 0; i < x.cols; ++i) s += x.data[b * x.cols + i] * w.data[i * w.cols + o];
      y.data[b * w.cols + o] = relu && s < 0.0 ? 0.0 : s;
    }
  }
}

void dense_backward_params(MatrixView x, MatrixView dy, MutableMatrixView dw, std::span<double> db) {
  for (int i = 0; i < x.cols; ++i) {
    for (int o = 0; o < dy.cols; ++o) {
      double s = 0.0;
      for (int b = 0; b < x.rows; ++b) s += x.data[b * x.cols + i] * dy.data[b * dy.cols + o];
      dw.data[i * dy.cols + o] = s;
    }
  }
  for (int o = 0; o < dy.cols; ++o) {
    double s = 0.0;
    for (int b = 0; b < dy.rows; ++b) s += dy.data[b * dy.cols + o];
    db[o] = s;
  }
}

void dense_backward_input(MatrixView dy, MatrixView w, MutableMatrixView dx) {
  for (int b = 0; b < dy.rows; ++b) {
    for (int i = 0; i < w.rows; ++i) {
      double s = 0.0;
      for (int o = 0; o < dy.cols; ++o) s += dy.data[b * dy.cols + o] * w.data[i * w.cols + o];
      dx.data[b * w.rows + i] = s;
    }
  }
}

double sum_inverse_gain(const FadingParams& params, std::size_t draws, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t c = 0, begin = 0; begin < draws; ++c, begin += kMonteCarloChunk) {
    total += chunk_inverse_gain(params, begin, std::min(draws, begin + kMonteCarloChunk), seed, c);
  }
  return total;
}

}  // namespace reference

}  // namespace semsim::kernels
