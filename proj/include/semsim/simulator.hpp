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

// The sampling MDP: a source walking through a clip, a fading link, and the
// predicting destination.
//
// Episode timeline for a start offset o into a clip:
//   t = -1, 0    frames o and o+1 are always transmitted (bootstrap, energy
//                charged, no decision, no reward)
//   t = 1..T     frame o+1+t; the policy decides, unless the destination asked
//                for a resample at the previous step, in which case a = 1.
// Sampled steps pay energy and earn r1 = w2 ln(1 + w1 E_mJ). Skipped steps
// earn r0 = w3 - exp(w4 D_hat - 1) from the deviation between the true and the
// displayed (predicted) layout.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semsim/agent.hpp"
#include "semsim/channel.hpp"
#include "semsim/ingest.hpp"
#include "semsim/predictor.hpp"

namespace semsim {

struct RewardConfig {
  double w1 = 10.0;
  double w2 = -6.0;
  double w3 = 1.0;
  double w4 = 2.0;
  double deviation_threshold = 0.07;
  double kappa = 0.5;

  double sample_reward(double energy_mj) const;
  double skip_reward(double penalized_deviation) const;
  void validate() const;
};

struct ChannelConfig {
  LinkBudget::Spec link;
  double m = 6.0;
  double m_s = 6.0;
  /// Multiplier from physical joules to the energy fed into the reward.
  /// <= 0 derives it so that a packet of `anchor_vehicles` records costs
  /// `anchor_mj` millijoules.
  double energy_scale = 0.0;
  double anchor_mj = 0.015;
  int anchor_vehicles = 8;
  /// Draw the gain per transmission instead of using the closed-form mean.
  bool stochastic_energy = false;

  FadingParams fading() const;
  double resolved_energy_scale() const;
  void validate() const;
};

struct EpisodeConfig {
  int steps = 150;
  PredictorConfig predictor;
  ChannelConfig channel;
  RewardConfig reward;
  StateEncoding state;
  /// Keep every displayed layout in the metrics.
  bool record_layouts = false;
  std::uint64_t seed = 1;

  void validate() const;
};

struct StepTrace {
  int t = 0;
  int frame_index = 0;
  int action = 0;
  bool forced = false;
  double packet_bits = 0.0;
  double chi = 0.0;
  double energy_j = 0.0;
  double reward = 0.0;
  /// Deviation of the displayed prediction (skipped steps only).
  std::optional<double> deviation;
  std::optional<double> penalized;
  /// Comparison of a received packet against its prediction.
  std::optional<double> received_deviation;
  bool resample_requested = false;
};

struct EpisodeMetrics {
  std::string clip;
  int start_offset = 0;
  double cumulative_reward = 0.0;
  double total_energy_j = 0.0;
  double bootstrap_energy_j = 0.0;
  double mean_deviation = 0.0;
  int sample_count = 0;
  int forced_count = 0;
  int steps = 0;
  bool truncated = false;
  std::vector<StepTrace> trace;
  std::vector<VisualLayout> displayed;
};

class SamplingPolicy {
 public:
  virtual ~SamplingPolicy() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual int decide(std::span<const double> features, int t) = 0;
  /// Independent copy with the same parameters and freshly reset state.
  virtual std::unique_ptr<SamplingPolicy> clone() const = 0;
};

/// Samples when (t - t0) mod period == 0.
class PeriodicPolicy final : public SamplingPolicy {
 public:
  explicit PeriodicPolicy(int period, int t0 = 0);
  std::string name() const override;
  int decide(std::span<const double> features, int t) override;
  std::unique_ptr<SamplingPolicy> clone() const override;
  int period() const { return period_; }

 private:
  int period_;
  int t0_;
};

class ConstantPolicy final : public SamplingPolicy {
 public:
  explicit ConstantPolicy(int action) : action_(action) {}
  std::string name() const override { return action_ ? "always" : "never"; }
  int decide(std::span<const double>, int) override { return action_; }
  std::unique_ptr<SamplingPolicy> clone() const override { return std::make_unique<ConstantPolicy>(action_); }

 private:
  int action_;
};

/// A trained actor. Greedy by default; stochastic mode reseeds on reset().
class AgentPolicy final : public SamplingPolicy {
 public:
  AgentPolicy(std::shared_ptr<const SacNetworks> nets, ActionMode mode = ActionMode::kGreedy,
              std::uint64_t seed = 1, std::string name = "agent");
  std::string name() const override { return name_; }
  void reset() override { rng_.seed(seed_); }
  int decide(std::span<const double> features, int t) override;
  std::unique_ptr<SamplingPolicy> clone() const override;

 private:
  std::shared_ptr<const SacNetworks> nets_;
  ActionMode mode_;
  std::uint64_t seed_;
  std::string name_;
  std::mt19937_64 rng_;
};

/// Environment over a set of clips. Training resets draw a clip and a start
/// offset from the supplied generator; evaluation uses begin().
class SemanticEnvironment final : public Environment {
 public:
  SemanticEnvironment(std::shared_ptr<const std::vector<FootageClip>> clips, EpisodeConfig config);

  int state_dim() const override { return config_.state.dim(); }
  std::vector<double> reset(bool new_scene, std::mt19937_64& rng) override;
  Step step(int action) override;
  double bootstrap_energy_j() const override { return metrics_.bootstrap_energy_j; }

  /// Starts an episode on clip `clip` at frame `offset`; returns the first state.
  std::vector<double> begin(std::size_t clip, int offset);
  /// Largest start offset that still leaves room for a full episode.
  int max_offset(std::size_t clip) const;

  const EpisodeConfig& config() const { return config_; }
  const EpisodeMetrics& metrics() const { return metrics_; }
  const AgentState& current_state() const { return state_; }
  int time() const { return t_; }
  bool done() const { return done_; }
  /// Energy (J) and reward-scale energy (mJ) of a packet of `bits` under the closed form.
  double packet_energy_j(double bits) const;
  double reward_energy_mj(double energy_j) const { return energy_j * energy_scale_ * 1e3; }

 private:
  const SceneAnnotation& frame(int t) const;
  bool has_frame(int t) const;
  void observe();
  double charge(double bits);
  double gain_feature() const;

  std::shared_ptr<const std::vector<FootageClip>> clips_;
  EpisodeConfig config_;
  LinkBudget link_;
  FadingParams fading_;
  double energy_scale_;
  std::mt19937_64 energy_rng_;

  bool has_scene_ = false;
  std::size_t clip_ = 0;
  int offset_ = 0;
  int t_ = 0;
  bool done_ = true;
  bool force_next_ = false;
  int deviation_steps_ = 0;
  double deviation_sum_ = 0.0;
  SceneAnnotation last_sampled_;
  int last_sampled_time_ = 0;
  std::vector<double> chi_history_;
  AgentState state_;
  std::unique_ptr<Destination> destination_;
  EpisodeMetrics metrics_;
};

/// Runs one full episode with `policy` from (clip, offset).
EpisodeMetrics run_episode(SemanticEnvironment& env, SamplingPolicy& policy, std::size_t clip, int offset);
EpisodeMetrics run_episode(std::shared_ptr<const std::vector<FootageClip>> clips, const EpisodeConfig& config,
                           SamplingPolicy& policy, std::size_t clip, int offset);

struct ComparisonRow {
  std::string clip;
  std::string policy;
  EpisodeMetrics metrics;
};

/// Every policy on every clip from `offsets[clip]`; rows ordered clip-major.
/// Episodes run on up to `jobs` threads; rows are identical for any job count.
std::vector<ComparisonRow> compare_policies(std::shared_ptr<const std::vector<FootageClip>> clips,
                                            const EpisodeConfig& config,
                                            const std::vector<std::shared_ptr<const SamplingPolicy>>& policies,
                                            const std::vector<int>& offsets, int jobs = 1);

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_to_json(const std::vector<ComparisonRow>& rows);
/// One JSON object per step.
std::string trace_to_jsonl(const EpisodeMetrics& metrics);
/// Displayed layouts as JSON: {"width", "height", "frames": [["0012..", ...], ...]}.
std::string layouts_to_json(const std::vector<VisualLayout>& layouts);

}  // namespace semsim
