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

// Serial reference kernels against their OpenMP versions.
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "semsim/channel.hpp"
#include "semsim/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace semsim;
namespace k = semsim::kernels;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-34s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#endif
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  auto fill = [&](std::vector<double>& v) {
    for (auto& x : v) x = n(rng);
  };

  for (int batch : {256, 1024}) {
    const int in = 153, out = 300;
    std::vector<double> x(std::size_t(batch) * in), w(std::size_t(in) * out), b(out), y(std::size_t(batch) * out);
    std::vector<double> dy(y.size()), dw(w.size()), db(out), dx(x.size());
    fill(x);
    fill(w);
    fill(b);
    fill(dy);
    const k::MatrixView xv{x.data(), batch, in}, wv{w.data(), in, out}, dyv{dy.data(), batch, out};
    const k::MutableMatrixView yv{y.data(), batch, out}, dwv{dw.data(), in, out}, dxv{dx.data(), batch, in};
    char label[64];
    std::snprintf(label, sizeof label, "dense_forward %dx%dx%d", batch, in, out);
    report(label, time_ms([&] { k::reference::dense_forward(xv, wv, b, yv, true); }, 20),
           time_ms([&] { k::dense_forward(xv, wv, b, yv, true); }, 20));
    std::snprintf(label, sizeof label, "dense_backward_params %d", batch);
    report(label, time_ms([&] { k::reference::dense_backward_params(xv, dyv, dwv, db); }, 20),
           time_ms([&] { k::dense_backward_params(xv, dyv, dwv, db); }, 20));
    std::snprintf(label, sizeof label, "dense_backward_input %d", batch);
    report(label, time_ms([&] { k::reference::dense_backward_input(dyv, wv, dxv); }, 20),
           time_ms([&] { k::dense_backward_input(dyv, wv, dxv); }, 20));
  }

  std::vector<std::uint8_t> real(1920 * 1080), pred(real.size());
  std::uniform_int_distribution<int> cls(0, 4);
  for (std::size_t i = 0; i < real.size(); ++i) {
    real[i] = std::uint8_t(cls(rng));
    pred[i] = std::uint8_t(cls(rng));
  }
  std::array<std::int64_t, 25> hist{};
  report("joint_class_histogram 1920x1080", time_ms([&] { k::reference::joint_class_histogram(real, pred, hist); }, 20),
         time_ms([&] { k::joint_class_histogram(real, pred, hist); }, 20));

  const FadingParams p{6.0, 6.0, 1.0};
  report("sum_inverse_gain 1e6 draws", time_ms([&] { k::reference::sum_inverse_gain(p, 1'000'000, 7); }, 3),
         time_ms([&] { k::sum_inverse_gain(p, 1'000'000, 7); }, 3));
  return 0;
}
