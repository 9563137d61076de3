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

// Shared helpers for the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "semsim/agent.hpp"
#include "semsim/ingest.hpp"
#include "semsim/layout.hpp"

namespace semsim::test {

#ifdef SEMSIM_FIXTURE_DIR
inline std::string fixture(const std::string& name) { return std::string(SEMSIM_FIXTURE_DIR) + "/" + name; }
#endif

/// Box with corners on the k / denom lattice, ordered and inside the unit square.
inline BoundingBox lattice_box(std::mt19937_64& rng, int denom) {
  std::uniform_int_distribution<int> d(0, denom);
  int x0 = d(rng), x1 = d(rng), y0 = d(rng), y1 = d(rng);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return {double(x0) / denom, double(y0) / denom, double(x1) / denom, double(y1) / denom};
}

inline SceneAnnotation random_scene(std::mt19937_64& rng, int max_vehicles, int denom, int id_range) {
  std::uniform_int_distribution<int> count(0, max_vehicles);
  std::uniform_int_distribution<int> cls(1, kNumClasses);
  std::uniform_int_distribution<int> id(0, id_range - 1);
  SceneAnnotation s;
  const int n = count(rng);
  std::vector<bool> used(static_cast<std::size_t>(id_range), false);
  for (int i = 0; i < n; ++i) {
    int tid = id(rng);
    if (used[static_cast<std::size_t>(tid)]) continue;
    used[static_cast<std::size_t>(tid)] = true;
    s.vehicles.push_back({tid, vehicle_class_from_code(cls(rng)), lattice_box(rng, denom)});
  }
  return s;
}

// Integer-lattice box: corners are k / denom.
struct IBox {
  int x0, y0, x1, y1;
};

inline IBox to_lattice(const BoundingBox& b, int denom) {
  auto k = [denom](double v) { return static_cast<int>(std::lround(v * denom)); };
  return {k(b.b1), k(b.b2), k(b.b3), k(b.b4)};
}

// Per-vehicle mismatch term as an exact fraction num / den.
inline std::pair<std::int64_t, std::int64_t> change_fraction(const IBox& a, const IBox& b) {
  const std::int64_t area_a = std::int64_t(a.x1 - a.x0) * (a.y1 - a.y0);
  const std::int64_t area_b = std::int64_t(b.x1 - b.x0) * (b.y1 - b.y0);
  const std::int64_t w = std::max(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const std::int64_t h = std::max(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const std::int64_t inter = w * h;
  return {area_a + area_b - 2 * inter, 2 * (area_a + area_b - inter)};
}

inline double oracle_chi(const SceneAnnotation& now, const SceneAnnotation& then, int denom) {
  std::map<int, IBox> a, b;
  for (const auto& v : now.vehicles) a[v.track_id] = to_lattice(v.box, denom);
  for (const auto& v : then.vehicles) b[v.track_id] = to_lattice(v.box, denom);
  std::set<int> ids;
  for (auto& [id, _] : a) ids.insert(id);
  for (auto& [id, _] : b) ids.insert(id);
  double chi = 0.0;
  for (int id : ids) {
    if (!a.count(id) || !b.count(id)) {
      chi += 0.5;
      continue;
    }
    const auto [num, den] = change_fraction(a[id], b[id]);
    chi += den == 0 ? 0.0 : double(num) / double(den);
  }
  return chi;
}

// Cell (x, y) of a width x height grid is painted by a lattice box if its open
// interior meets the box interior; a zero-extent side paints the cell holding it.
inline bool covers_axis(int lo, int hi, int cell, int n, int denom) {
  if (lo == hi) return cell == std::min(lo * n / denom, n - 1);
  return std::int64_t(cell + 1) * denom > std::int64_t(lo) * n && std::int64_t(cell) * denom < std::int64_t(hi) * n;
}

inline std::vector<int> oracle_raster(const SceneAnnotation& s, int w, int h, int denom) {
  std::vector<int> grid(static_cast<std::size_t>(w * h), 0);
  for (const auto& v : s.vehicles) {
    const IBox b = to_lattice(v.box, denom);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (covers_axis(b.x0, b.x1, x, w, denom) && covers_axis(b.y0, b.y1, y, h, denom)) {
          grid[static_cast<std::size_t>(y * w + x)] = code(v.cls);
        }
      }
    }
  }
  return grid;
}

inline double oracle_deviation(const std::vector<int>& real, const std::vector<int>& pred) {
  double d = 0.0;
  for (int k = 1; k <= kNumClasses; ++k) {
    std::int64_t n = 0, np = 0, both = 0;
    for (std::size_t i = 0; i < real.size(); ++i) {
      n += real[i] == k;
      np += pred[i] == k;
      both += real[i] == k && pred[i] == k;
    }
    if (n + np == 0) continue;
    d += double(n + np - 2 * both) / double(2 * (n + np));
  }
  return d;
}

inline Batch random_batch(std::mt19937_64& rng, int n, int dim) {
  std::normal_distribution<double> x(0.0, 1.0), r(0.0, 2.0);
  std::bernoulli_distribution coin(0.5), done(0.2);
  Batch b;
  b.size = n;
  b.dim = dim;
  for (int i = 0; i < n * dim; ++i) {
    b.states.push_back(x(rng));
    b.next_states.push_back(x(rng));
  }
  for (int i = 0; i < n; ++i) {
    b.actions.push_back(coin(rng) ? 1 : 0);
    b.rewards.push_back(r(rng));
    b.dones.push_back(done(rng) ? 1.0 : 0.0);
  }
  return b;
}

inline SacNetworks random_networks(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> temp(0.05, 2.0);
  auto nets = SacNetworks::create(dim, {8, 6}, temp(rng), rng);
  // Targets that differ from the critics exercise the min over both.
  std::mt19937_64 other(rng());
  auto alt = SacNetworks::create(dim, {8, 6}, 1.0, other);
  nets.target1 = alt.critic1;
  nets.target2 = alt.critic2;
  return nets;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / scale;
}

// Gradient check error: per parameter tensor, the largest deviation from the
// central difference divided by the tensor's largest gradient magnitude.
// Returns the worst tensor.
inline double max_gradient_error(nn::Mlp& net, const nn::Gradients& grads, const std::function<double()>& loss) {
  constexpr double h = 1e-6;
  double worst = 0.0;
  auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
    double diff = 0.0, scale = 1e-12;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = loss();
      params[i] = saved - h;
      const double down = loss();
      params[i] = saved;
      const double numeric = (up - down) / (2 * h);
      diff = std::max(diff, std::abs(analytic[i] - numeric));
      scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric)});
    }
    worst = std::max(worst, diff / scale);
  };
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    check(net.layers()[l].weights, grads.weights[l]);
    check(net.layers()[l].bias, grads.bias[l]);
  }
  return worst;
}

// Two-action bandit: skipping earns +1, sampling -1, regardless of the state.
class BanditEnvironment final : public Environment {
 public:
  int state_dim() const override { return 4; }
  std::vector<double> reset(bool, std::mt19937_64& rng) override {
    t_ = 0;
    rng_.seed(rng());
    return draw();
  }
  Step step(int action) override {
    Step s;
    s.action = action;
    s.reward = action == 0 ? 1.0 : -1.0;
    s.done = ++t_ >= 10;
    s.next_state = draw();
    return s;
  }

 private:
  std::vector<double> draw() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng_), u(rng_), u(rng_), u(rng_)};
  }
  int t_ = 0;
  std::mt19937_64 rng_;
};

inline SacConfig small_config() {
  SacConfig cfg;
  cfg.hidden = {16, 16};
  cfg.batch_size = 32;
  cfg.warmup = 64;
  cfg.memory_capacity = 5000;
  cfg.lr_actor = 3e-3;
  cfg.lr_critic = 3e-3;
  cfg.lr_temperature = 3e-3;
  cfg.gamma = 0.9;
  cfg.initial_temperature = 0.2;
  cfg.seed = 21;
  return cfg;
}

}  // namespace semsim::test
