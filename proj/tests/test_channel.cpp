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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "semsim/channel.hpp"
#include "semsim/error.hpp"
#include "semsim/kernels.hpp"

using namespace semsim;

namespace {

// E[g^n] from the ratio of independent gamma variates, written with tgamma.
double oracle_moment(const FadingParams& p, double n) {
  return std::pow(p.g_bar * (p.m_s - 1.0) / p.m, n) * std::tgamma(p.m + n) * std::tgamma(p.m_s - n) /
         (std::tgamma(p.m) * std::tgamma(p.m_s));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("channel") {
  TEST_CASE("link budget constants") {
    const LinkBudget link;
    CHECK(rel(pathloss_db(100.0), 110.5) < 1e-12);
    CHECK(rel(link.g_bar(), 8.91250938e-12) < 1e-8);
    CHECK(rel(link.snr_threshold(), 31.6227766) < 1e-8);
    CHECK(rel(link.noise_power_w(), 1e-9) < 1e-12);
    CHECK(rel(rate_bits_per_s(link), 1000.0 * std::log2(1.0 + std::pow(10.0, 1.5))) < 1e-14);
    CHECK(rel(rate_bits_per_s(link), 5027.8) < 1e-4);
    CHECK(transmission_duration(0.0, link) == 0.0);
    CHECK(rel(transmission_duration(176.0, link), 176.0 / rate_bits_per_s(link)) < 1e-15);
    CHECK_THROWS_AS(transmission_duration(-1.0, link), DomainError);
  }

  TEST_CASE("domain checks") {
    CHECK_THROWS_AS(moment({1.0, 6.0, 1.0}, -1.0), DomainError);
    CHECK_THROWS_AS(moment({6.0, 0.5, 1.0}, -1.0), DomainError);
    CHECK_THROWS_AS(moment({6.0, 6.0, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(moment({3.0, 3.0, 1.0}, 3.0), DomainError);
    CHECK_THROWS_AS(moment({3.0, 3.0, 1.0}, -3.0), DomainError);
    CHECK_THROWS_AS(pdf({6.0, 6.0, 1.0}, 0.0), DomainError);
    LinkBudget::Spec bad;
    bad.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(LinkBudget{bad}, DomainError);
  }

  TEST_CASE("moments: gamma identity and closed forms") {
    const FadingParams p{6.0, 6.0, 1.0};
    CHECK(rel(moment(p, -1.0), 1.44) < 1e-9);
    CHECK(rel(moment(p, 1.0), 1.0) < 1e-12);
    const double gbar = LinkBudget().g_bar();
    CHECK(rel(moment({6.0, 6.0, gbar}, -1.0), 1.44 / gbar) < 1e-9);
    CHECK(moment(p, 0.0) == 1.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> shape(1.5, 12.0), scale(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
      const FadingParams q{shape(rng), shape(rng), scale(rng)};
      for (double n : {-1.0, 1.0, -0.5, 0.3}) {
        if (n <= -q.m || n >= q.m_s) continue;
        CHECK(rel(moment(q, n), oracle_moment(q, n)) < 1e-10);
      }
    }
  }

  TEST_CASE("quadrature cross-checks the closed forms") {
    for (const FadingParams p : {FadingParams{6, 6, 1}, FadingParams{2, 3, 0.5}, FadingParams{1.5, 8, 4},
                                 FadingParams{10, 1.8, 1}}) {
      CHECK(std::abs(quadrature_probability(p, 0.0, INFINITY) - 1.0) < 1e-6);
      CHECK(rel(quadrature_moment(p, 1.0), moment(p, 1.0)) < 1e-6);
      CHECK(rel(quadrature_moment(p, -1.0), moment(p, -1.0)) < 1e-6);
    }
  }

  TEST_CASE("cdf is consistent with the density") {
    const FadingParams p{4.0, 5.0, 2.0};
    CHECK(cdf(p, 0.0) == 0.0);
    double last = 0.0;
    for (double g : {0.1, 0.5, 1.0, 2.0, 4.0, 20.0}) {
      const double c = cdf(p, g);
      CHECK(c > last);
      CHECK(std::abs(c - quadrature_probability(p, 0.0, g)) < 1e-7);
      last = c;
    }
  }

  TEST_CASE("sampler moments and determinism") {
    const FadingParams p{6.0, 6.0, 1.0};
    const double inv = monte_carlo_inverse_moment(p, 1'000'000, 42);
    CHECK(rel(inv, 1.44) < 0.02);
    CHECK(monte_carlo_inverse_moment(p, 1'000'000, 42) == inv);

    std::mt19937_64 rng(8);
    double s = 0.0;
    for (int i = 0; i < 400000; ++i) s += sample_gain(p, rng);
    CHECK(rel(s / 400000, 1.0) < 0.01);
  }

  TEST_CASE("Kolmogorov-Smirnov against the cdf") {
    for (const FadingParams p : {FadingParams{6, 6, 1}, FadingParams{2, 4, 3}}) {
      std::mt19937_64 rng(1234);
      constexpr int n = 20000;
      std::vector<double> x(n);
      for (auto& v : x) v = sample_gain(p, rng);
      std::sort(x.begin(), x.end());
      double d = 0.0;
      for (int i = 0; i < n; ++i) {
        const double f = cdf(p, x[i]);
        d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
      }
      // Critical value at the 0.001 level.
      CHECK(d < 1.95 / std::sqrt(double(n)));
    }
  }

  TEST_CASE("energy identity on random parameter sets") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> shape(1.2, 10.0), bits(0.0, 1408.0), db(0.0, 30.0),
        dist(10.0, 500.0), bw(100.0, 1e6);
    for (int i = 0; i < 100; ++i) {
      LinkBudget::Spec spec;
      spec.bandwidth_hz = bw(rng);
      spec.snr_threshold_db = db(rng);
      spec.distance_m = dist(rng);
      const LinkBudget link(spec);
      const FadingParams p{shape(rng), shape(rng), link.g_bar()};
      const double l = bits(rng);
      const double want =
          transmission_duration(l, link) * link.snr_threshold() * link.noise_power_w() * moment(p, -1.0);
      const double got = expected_energy(l, link, p);
      if (want == 0.0) {
        CHECK(got == 0.0);
      } else {
        CHECK(rel(got, want) < 1e-12);
      }
    }
  }

  TEST_CASE("energy is monotone in size, threshold and inverse gain") {
    const double sizes[] = {22, 88, 176, 704, 1408};
    const double thresholds[] = {0, 5, 10, 15, 25};
    const double distances[] = {20, 50, 100, 200, 400};
    auto energy = [](double l, double th, double d) {
      LinkBudget::Spec spec;
      spec.snr_threshold_db = th;
      spec.distance_m = d;
      const LinkBudget link(spec);
      return expected_energy(l, link, {6.0, 6.0, link.g_bar()});
    };
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
          const double e = energy(sizes[i], thresholds[j], distances[k]);
          CHECK(e > 0.0);
          if (i + 1 < 5) CHECK(energy(sizes[i + 1], thresholds[j], distances[k]) > e);
          if (j + 1 < 5) CHECK(energy(sizes[i], thresholds[j + 1], distances[k]) > e);
          if (k + 1 < 5) CHECK(energy(sizes[i], thresholds[j], distances[k + 1]) > e);
        }
      }
    }
  }

  TEST_CASE("physical energy of an 8-vehicle packet") {
    const LinkBudget link;
    const double e = expected_energy(176.0, link, {6.0, 6.0, link.g_bar()});
    const double want = 176.0 / 5027.8 * std::pow(10.0, 1.5) * 1e-9 * 1.44 / 8.91250938e-12;
    CHECK(rel(e, want) < 1e-4);
  }

  TEST_CASE("per-interval energy converges to the closed form") {
    for (const FadingParams shape : {FadingParams{6, 6, 1}, FadingParams{3, 4, 1}, FadingParams{10, 2.5, 1}}) {
      const LinkBudget link;
      FadingParams p = shape;
      p.g_bar = link.g_bar();
      std::mt19937_64 rng(55);
      double s = 0.0;
      constexpr int n = 40000;
      for (int i = 0; i < n; ++i) s += sampled_energy(176.0, link, p, rng);
      CHECK(rel(s / n, expected_energy(176.0, link, p)) < 0.02);
    }
  }

  TEST_CASE("parallel Monte Carlo equals the serial reference") {
    const FadingParams p{6.0, 6.0, 1.0};
    for (std::size_t draws : {std::size_t{1}, kernels::kMonteCarloChunk - 1, kernels::kMonteCarloChunk * 3 + 17}) {
      CHECK(kernels::sum_inverse_gain(p, draws, 9) == kernels::reference::sum_inverse_gain(p, draws, 9));
    }
  }
}
