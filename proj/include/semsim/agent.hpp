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

// Discrete soft actor-critic semantic sampling agent.
//
// Actions are {0: skip, 1: sample}. All expectations over actions are exact
// two-term sums. Losses, for a batch of transitions (S, a, r, S', done):
//
//   critic:      1/2 mean (Q_i(S, a) - y)^2,
//                y = r + gamma (1 - done) sum_a' pi(a'|S') (min_j Qbar_j(S', a') - alpha log pi(a'|S'))
//   actor:       mean sum_a pi(a|S) (alpha log pi(a|S) - min_j Q_j(S, a))
//   temperature: alpha (mean H(pi(.|S)) - H_target), optimized over log alpha
//
// Targets follow the critics by soft blending with rate tau.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "semsim/nn.hpp"

namespace semsim {

inline constexpr int kNumActions = 2;

/// Feature scaling for the agent's observation.
struct StateEncoding {
  int window = 150;                     // chi history covers t .. t - window
  double packet_norm_bits = 64.0 * 22;  // L_t divisor
  double chi_norm = 16.0;               // chi divisor (vehicle-count cap)
  double gain_nominal = 0.0;            // g_bar divisor; <= 0 means the link's own g_bar
  bool include_gap = false;             // optional t - t_hat feature
  double gap_norm = 20.0;

  int dim() const { return 1 + (window + 1) + 1 + (include_gap ? 1 : 0); }
};

/// Raw observation: packet size, chi window (newest first, zero padded), average gain.
struct AgentState {
  double packet_bits = 0.0;
  std::vector<double> chi_window;
  double g_bar = 0.0;
  int gap = 0;

  std::vector<double> features(const StateEncoding& enc) const;
};

/// Builds the observation from the current and last sampled scenes' chi history.
/// `chi_history` holds chi values oldest first and includes the current step.
AgentState build_state(double packet_bits, std::span<const double> chi_history, double g_bar, int gap,
                       const StateEncoding& enc);

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

/// FIFO ring of transitions stored as flat feature arrays.
class ReplayMemory {
 public:
  ReplayMemory(std::size_t capacity, int state_dim);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int state_dim() const { return dim_; }

  /// Uniform sample of `n` distinct indices (n <= size()).
  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;

  struct Batch {
    int size = 0;
    int dim = 0;
    std::vector<double> states;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<double> next_states;
    std::vector<double> dones;
  };
  Batch gather(std::span<const std::size_t> indices) const;
  Batch sample(std::size_t n, std::mt19937_64& rng) const { return gather(sample_indices(n, rng)); }

 private:
  std::size_t capacity_;
  int dim_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  std::vector<double> states_, next_states_, rewards_, dones_;
  std::vector<int> actions_;
};
using Batch = ReplayMemory::Batch;

struct SacConfig {
  std::vector<int> hidden{300, 200, 200};
  double lr_actor = 1e-5;
  double lr_critic = 2e-5;
  double lr_temperature = 1e-5;
  double gamma = 1.0;
  double tau = 0.2;
  double target_entropy = -1.0;
  double initial_temperature = 1.0;
  std::size_t batch_size = 1024;
  std::size_t memory_capacity = 100000;
  std::size_t warmup = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SacNetworks {
  nn::Mlp actor;
  nn::Mlp critic1, critic2;
  nn::Mlp target1, target2;
  double log_temperature = 0.0;

  double temperature() const;
  int state_dim() const { return actor.input_size(); }

  static SacNetworks create(int state_dim, const std::vector<int>& hidden, double initial_temperature,
                            std::mt19937_64& rng);

  friend bool operator==(const SacNetworks&, const SacNetworks&) = default;
};

/// Action probabilities and their logs for a batch (row-major batch x 2).
struct PolicyOutput {
  std::vector<double> probs;
  std::vector<double> log_probs;
};
PolicyOutput policy_from_logits(std::span<const double> logits, int batch);
PolicyOutput policy(const nn::Mlp& actor, std::span<const double> states, int batch);

/// Soft state values for critic targets: y = r + gamma (1 - done) V(S').
std::vector<double> critic_targets(const Batch& batch, const SacNetworks& nets, double gamma);

struct CriticLoss {
  double loss1 = 0.0;
  double loss2 = 0.0;
  nn::Gradients grad1, grad2;
};
CriticLoss critic_loss(const Batch& batch, const SacNetworks& nets, double gamma);

struct ActorLoss {
  double loss = 0.0;
  nn::Gradients grad;
  double mean_entropy = 0.0;
};
ActorLoss actor_loss(const Batch& batch, const SacNetworks& nets);

struct TemperatureLoss {
  double loss = 0.0;
  double grad_log_temperature = 0.0;
};
TemperatureLoss temperature_loss(const Batch& batch, const SacNetworks& nets, double target_entropy);

/// targets = tau * critics + (1 - tau) * targets.
void soft_update(SacNetworks& nets, double tau);

enum class ActionMode { kStochastic, kGreedy };

int select_action(std::span<const double> features, const SacNetworks& nets, ActionMode mode, std::mt19937_64& rng);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Learner: owns networks, optimizers and the replay memory.
class SacAgent {
 public:
  SacAgent(int state_dim, SacConfig config);
  SacAgent(SacNetworks nets, SacConfig config);

  int act(std::span<const double> features, ActionMode mode);
  void observe(const Transition& t);
  /// One gradient step on a sampled batch, if the memory is warm. Returns true if updated.
  bool update();

  const SacNetworks& networks() const { return nets_; }
  const ReplayMemory& memory() const { return memory_; }
  const SacConfig& config() const { return config_; }
  std::size_t updates() const { return updates_; }

  struct LastLosses {
    double critic = 0.0, actor = 0.0, temperature = 0.0;
  };
  const LastLosses& last_losses() const { return last_; }

 private:
  SacConfig config_;
  std::mt19937_64 rng_;
  SacNetworks nets_;
  ReplayMemory memory_;
  nn::Adam actor_opt_, critic1_opt_, critic2_opt_;
  nn::ScalarAdam temperature_opt_;
  std::size_t updates_ = 0;
  LastLosses last_;
};

/// Environment contract consumed by the trainer.
class Environment {
 public:
  struct Step {
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;
    int action = 0;  // action actually applied (may be overridden)
    double energy_j = 0.0;
    std::optional<double> deviation;
  };

  virtual ~Environment() = default;
  virtual int state_dim() const = 0;
  /// Starts an episode. `new_scene` re-draws the initial scene from `rng`.
  virtual std::vector<double> reset(bool new_scene, std::mt19937_64& rng) = 0;
  virtual Step step(int action) = 0;
  /// Energy charged outside agent decisions at episode start.
  virtual double bootstrap_energy_j() const { return 0.0; }
};

struct TrainSchedule {
  int episodes = 3000;
  int scene_block = 20;
  std::uint64_t seed = 1;
};

struct EpisodeCurve {
  int episode = 0;
  int scene_block = 0;
  double cumulative_reward = 0.0;
  double energy_j = 0.0;
  double mean_deviation = 0.0;
  int samples = 0;
};

/// Runs the episodic loop with one gradient step per environment step.
/// Throws DivergenceError if any loss becomes non-finite.
std::vector<EpisodeCurve> train(Environment& env, SacAgent& agent, const TrainSchedule& schedule,
                                const std::function<void(const EpisodeCurve&)>& on_episode = {});

std::string curves_to_csv(const std::vector<EpisodeCurve>& curves);

/// Versioned JSON snapshot: layer shapes, row-major weights, log temperature.
std::string networks_to_json(const SacNetworks& nets);
SacNetworks networks_from_json(const std::string& text);

}  // namespace semsim
