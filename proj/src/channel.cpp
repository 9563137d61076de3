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

#include "semsim/channel.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "semsim/error.hpp"
#include "semsim/kernels.hpp"

namespace semsim {

void FadingParams::validate() const {
  if (!(m > 1.0)) throw DomainError("multipath shape m must exceed 1, got " + std::to_string(m));
  if (!(m_s > 1.0)) throw DomainError("shadowing shape m_s must exceed 1, got " + std::to_string(m_s));
  if (!(g_bar > 0.0)) throw DomainError("average gain must be positive");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double pathloss_db(double distance_m) { return 35.3 + 37.6 * std::log10(distance_m); }

LinkBudget::LinkBudget(const Spec& spec) : spec_(spec) {
  if (!(spec.bandwidth_hz > 0.0)) throw DomainError("bandwidth must be positive");
  if (!(spec.distance_m > 0.0)) throw DomainError("distance must be positive");
  theta_ = db_to_linear(spec.snr_threshold_db);
  noise_w_ = db_to_linear(spec.noise_psd_dbm_hz + 10.0 * std::log10(spec.bandwidth_hz) - 30.0);
  pathloss_db_ = semsim::pathloss_db(spec.distance_m);
  g_bar_ = db_to_linear(-pathloss_db_);
}

double pdf(const FadingParams& p, double g) {
  p.validate();
  if (!(g > 0.0)) throw DomainError("fading pdf is defined for g > 0");
  const double log_beta = std::lgamma(p.m) + std::lgamma(p.m_s) - std::lgamma(p.m + p.m_s);
  const double scale = (p.m_s - 1.0) * p.g_bar;
  // Evaluate in the normalized variable x = m g / scale to keep tiny gains well conditioned.
  const double x = p.m * g / scale;
  const double log_f = p.m * std::log(x) - (p.m + p.m_s) * std::log1p(x) - log_beta - std::log(g);
  return std::exp(log_f);
}

double moment(const FadingParams& p, double n) {
  p.validate();
  if (!(n > -p.m && n < p.m_s)) {
    throw DomainError("moment order " + std::to_string(n) + " outside (-m, m_s)");
  }
  const double rn = std::round(n);
  if (rn == n && std::abs(n) <= 64.0) {
    const int k = static_cast<int>(rn);
    double value = 1.0;
    if (k >= 0) {
      // Gamma(m+k)/(m^k Gamma(m)) * (m_s-1)^k Gamma(m_s-k)/Gamma(m_s), one factor pair per step.
      for (int j = 0; j < k; ++j) value *= ((p.m + j) / p.m) * ((p.m_s - 1.0) / (p.m_s - 1.0 - j)) * p.g_bar;
    } else {
      for (int j = 1; j <= -k; ++j) value *= (p.m / (p.m - j)) * ((p.m_s + j - 1.0) / (p.m_s - 1.0)) / p.g_bar;
    }
    return value;
  }
  const double log_value = n * (std::log(p.m_s - 1.0) + std::log(p.g_bar) - std::log(p.m)) + std::lgamma(p.m + n) +
                           std::lgamma(p.m_s - n) - std::lgamma(p.m) - std::lgamma(p.m_s);
  return std::exp(log_value);
}

double cdf(const FadingParams& p, double g) {
  p.validate();
  if (g <= 0.0) return 0.0;
  const double mg = p.m * g;
  const double x = mg / (mg + (p.m_s - 1.0) * p.g_bar);
  return boost::math::ibeta(p.m, p.m_s, x);
}

double rate_bits_per_s(const LinkBudget& link) { return link.bandwidth_hz() * std::log2(1.0 + link.snr_threshold()); }

double transmission_duration(double size_bits, const LinkBudget& link) {
  if (size_bits < 0.0) throw DomainError("packet size must be non-negative");
  if (size_bits == 0.0) return 0.0;
  return size_bits / rate_bits_per_s(link);
}

double expected_energy(double size_bits, const LinkBudget& link, const FadingParams& p) {
  p.validate();
  const double delta = transmission_duration(size_bits, link);
  // m Gamma(m-1) Gamma(m_s+1) / ((m_s-1) g_bar Gamma(m) Gamma(m_s))
  const double gamma_ratio =
      std::exp(std::lgamma(p.m - 1.0) + std::lgamma(p.m_s + 1.0) - std::lgamma(p.m) - std::lgamma(p.m_s));
  const double inverse_gain = p.m * gamma_ratio / ((p.m_s - 1.0) * p.g_bar);
  return delta * link.snr_threshold() * link.noise_power_w() * inverse_gain;
}

double monte_carlo_inverse_moment(const FadingParams& params, std::size_t draws, std::uint64_t seed) {
  params.validate();
  if (draws == 0) throw DomainError("Monte Carlo needs at least one draw");
  return kernels::sum_inverse_gain(params, draws, seed) / static_cast<double>(draws);
}

double quadrature_moment(const FadingParams& p, double n) {
  p.validate();
  // Integrate in units of g_bar so the integrand is O(1).
  FadingParams unit = p;
  unit.g_bar = 1.0;
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double x) { return x > 0.0 ? std::pow(x, n) * pdf(unit, x) : 0.0; };
  const double value = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
  return std::pow(p.g_bar, n) * value;
}

double quadrature_probability(const FadingParams& p, double a, double b) {
  p.validate();
  if (b <= a) return 0.0;
  auto f = [&](double g) { return g > 0.0 ? pdf(p, g) : 0.0; };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, std::max(a, 0.0), b, 12, 1e-13);
}

}  // namespace semsim
