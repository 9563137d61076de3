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

// F composite fading channel, link budget and transmission energy.
//
// The instantaneous gain g follows the Fisher-Snedecor F composite law with
// multipath shape m, shadowing shape m_s and mean g_bar. Under power control
// the transmitter spends p = theta * sigma^2 / g, so the expected energy of a
// packet is delta * theta * sigma^2 * E[1/g].
#pragma once

#include <cstdint>
#include <random>

namespace semsim {

struct FadingParams {
  double m = 6.0;
  double m_s = 6.0;
  double g_bar = 1.0;

  /// Throws DomainError unless m > 1, m_s > 1 and g_bar > 0.
  void validate() const;
};

/// Link constants. dB quantities are converted once at construction.
class LinkBudget {
 public:
  struct Spec {
    double bandwidth_hz = 1000.0;
    double snr_threshold_db = 15.0;
    double noise_psd_dbm_hz = -90.0;
    double distance_m = 100.0;
  };

  LinkBudget() : LinkBudget(Spec{}) {}
  explicit LinkBudget(const Spec& spec);

  const Spec& spec() const { return spec_; }
  double bandwidth_hz() const { return spec_.bandwidth_hz; }
  double snr_threshold() const { return theta_; }
  double noise_power_w() const { return noise_w_; }
  double pathloss_db() const { return pathloss_db_; }
  /// Average channel gain implied by the path loss, linear.
  double g_bar() const { return g_bar_; }

 private:
  Spec spec_;
  double theta_;
  double noise_w_;
  double pathloss_db_;
  double g_bar_;
};

double db_to_linear(double db);
double pathloss_db(double distance_m);

/// Density of the F composite gain at g > 0 (log-gamma arithmetic).
double pdf(const FadingParams& params, double g);

/// E[g^n] for -m < n < m_s. Integer orders use paired gamma ratios, others log-gamma.
double moment(const FadingParams& params, double n);

/// CDF via the regularized incomplete beta function.
double cdf(const FadingParams& params, double g);

/// g = g_bar (m_s - 1) U / (m V) with U ~ Gamma(m), V ~ Gamma(m_s).
template <class Engine>
double sample_gain(const FadingParams& params, Engine& rng) {
  std::gamma_distribution<double> multipath(params.m, 1.0);
  std::gamma_distribution<double> shadowing(params.m_s, 1.0);
  const double u = multipath(rng);
  const double v = shadowing(rng);
  return params.g_bar * (params.m_s - 1.0) * u / (params.m * v);
}

/// R = W log2(1 + theta), bits per second.
double rate_bits_per_s(const LinkBudget& link);

/// delta = L / R seconds.
double transmission_duration(double size_bits, const LinkBudget& link);

/// Closed-form expected packet energy in joules under power control.
double expected_energy(double size_bits, const LinkBudget& link, const FadingParams& params);

/// Monte Carlo estimate of E[1/g] from `draws` seeded samples.
double monte_carlo_inverse_moment(const FadingParams& params, std::size_t draws, std::uint64_t seed);

/// Energy of one packet with every transmission interval drawing its own gain.
/// `intervals` sub-slots split the duration evenly.
template <class Engine>
double sampled_energy(double size_bits, const LinkBudget& link, const FadingParams& params, Engine& rng,
                      int intervals = 8) {
  const double delta = transmission_duration(size_bits, link);
  if (delta == 0.0) return 0.0;
  double e = 0.0;
  for (int k = 0; k < intervals; ++k) e += link.snr_threshold() * link.noise_power_w() / sample_gain(params, rng);
  return e * delta / intervals;
}

/// Numerical integral of g^n * pdf over (0, inf); independent of the closed forms above.
double quadrature_moment(const FadingParams& params, double n);

/// Numerical integral of pdf over (a, b).
double quadrature_probability(const FadingParams& params, double a, double b);

}  // namespace semsim
