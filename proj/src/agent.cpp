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

#include "semsim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

namespace semsim {

using nlohmann::json;

std::vector<double> AgentState::features(const StateEncoding& enc) const {
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(enc.dim()));
  f.push_back(packet_bits / enc.packet_norm_bits);
  for (int i = 0; i <= enc.window; ++i) {
    const double chi = i < static_cast<int>(chi_window.size()) ? chi_window[static_cast<std::size_t>(i)] : 0.0;
    f.push_back(chi / enc.chi_norm);
  }
  f.push_back(enc.gain_nominal > 0.0 ? g_bar / enc.gain_nominal : g_bar);
  if (enc.include_gap) f.push_back(gap / enc.gap_norm);
  return f;
}

AgentState build_state(double packet_bits, std::span<const double> chi_history, double g_bar, int gap,
                       const StateEncoding& enc) {
  AgentState s;
  s.packet_bits = packet_bits;
  s.g_bar = g_bar;
  s.gap = gap;
  s.chi_window.assign(static_cast<std::size_t>(enc.window) + 1, 0.0);
  const std::size_t n = std::min(chi_history.size(), s.chi_window.size());
  for (std::size_t i = 0; i < n; ++i) s.chi_window[i] = chi_history[chi_history.size() - 1 - i];
  return s;
}

// --- replay memory -----------------------------------------------------------

ReplayMemory::ReplayMemory(std::size_t capacity, int state_dim) : capacity_(capacity), dim_(state_dim) {
  if (capacity == 0 || state_dim <= 0) throw std::invalid_argument("replay memory needs positive capacity and width");
  states_.resize(capacity * static_cast<std::size_t>(dim_));
  next_states_.resize(capacity * static_cast<std::size_t>(dim_));
  rewards_.resize(capacity);
  dones_.resize(capacity);
  actions_.resize(capacity);
}

void ReplayMemory::push(const Transition& t) {
  if (t.state.size() != static_cast<std::size_t>(dim_) || t.next_state.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("transition width does not match replay memory");
  }
  if (!std::isfinite(t.reward)) throw std::invalid_argument("transition reward must be finite");
  const std::size_t off = head_ * static_cast<std::size_t>(dim_);
  std::copy(t.state.begin(), t.state.end(), states_.begin() + static_cast<std::ptrdiff_t>(off));
  std::copy(t.next_state.begin(), t.next_state.end(), next_states_.begin() + static_cast<std::ptrdiff_t>(off));
  rewards_[head_] = t.reward;
  dones_[head_] = t.done ? 1.0 : 0.0;
  actions_[head_] = t.action;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t n, std::mt19937_64& rng) const {
  if (n > size_) throw std::invalid_argument("cannot sample more transitions than stored");
  // Floyd's algorithm: n distinct indices in [0, size).
  std::vector<std::size_t> out;
  out.reserve(n);
  std::unordered_set<std::size_t> seen;
  seen.reserve(n * 2);
  for (std::size_t j = size_ - n; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t chosen = seen.contains(t) ? j : t;
    seen.insert(chosen);
    out.push_back(chosen);
  }
  return out;
}

Batch ReplayMemory::gather(std::span<const std::size_t> indices) const {
  Batch b;
  b.size = static_cast<int>(indices.size());
  b.dim = dim_;
  const auto d = static_cast<std::size_t>(dim_);
  b.states.resize(indices.size() * d);
  b.next_states.resize(indices.size() * d);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>(i * d), d, b.states.begin() + static_cast<std::ptrdiff_t>(k * d));
    std::copy_n(next_states_.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                b.next_states.begin() + static_cast<std::ptrdiff_t>(k * d));
    b.actions.push_back(actions_[i]);
    b.rewards.push_back(rewards_[i]);
    b.dones.push_back(dones_[i]);
  }
  return b;
}

// --- networks and losses -------------------------------------------------------

void SacConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("at least one hidden layer is required");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  if (!(initial_temperature > 0.0)) throw std::invalid_argument("initial temperature must be positive");
  if (batch_size == 0 || memory_capacity < batch_size) throw std::invalid_argument("memory must hold a full batch");
}

double SacNetworks::temperature() const { return std::exp(log_temperature); }

SacNetworks SacNetworks::create(int state_dim, const std::vector<int>& hidden, double initial_temperature,
                                std::mt19937_64& rng) {
  std::vector<int> sizes{state_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kNumActions);
  SacNetworks n;
  n.actor = nn::Mlp(sizes, rng);
  n.critic1 = nn::Mlp(sizes, rng);
  n.critic2 = nn::Mlp(sizes, rng);
  n.target1 = n.critic1;
  n.target2 = n.critic2;
  n.log_temperature = std::log(initial_temperature);
  return n;
}

PolicyOutput policy_from_logits(std::span<const double> logits, int batch) {
  PolicyOutput p;
  p.probs.resize(static_cast<std::size_t>(batch) * kNumActions);
  p.log_probs.resize(p.probs.size());
  for (int b = 0; b < batch; ++b) {
    const double z0 = logits[static_cast<std::size_t>(b) * 2];
    const double z1 = logits[static_cast<std::size_t>(b) * 2 + 1];
    const double m = std::max(z0, z1);
    const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    const auto i = static_cast<std::size_t>(b) * 2;
    p.log_probs[i] = z0 - lse;
    p.log_probs[i + 1] = z1 - lse;
    p.probs[i] = std::exp(p.log_probs[i]);
    p.probs[i + 1] = std::exp(p.log_probs[i + 1]);
  }
  return p;
}

PolicyOutput policy(const nn::Mlp& actor, std::span<const double> states, int batch) {
  return policy_from_logits(actor.predict(states, batch), batch);
}

std::vector<double> critic_targets(const Batch& batch, const SacNetworks& nets, double gamma) {
  const int n = batch.size;
  const auto next = policy(nets.actor, batch.next_states, n);
  const auto q1 = nets.target1.predict(batch.next_states, n);
  const auto q2 = nets.target2.predict(batch.next_states, n);
  const double alpha = nets.temperature();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    double v = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      const auto i = static_cast<std::size_t>(b) * kNumActions + a;
      v += next.probs[i] * (std::min(q1[i], q2[i]) - alpha * next.log_probs[i]);
    }
    const auto bi = static_cast<std::size_t>(b);
    y[bi] = batch.rewards[bi] + gamma * (1.0 - batch.dones[bi]) * v;
  }
  return y;
}

namespace {

double critic_regression(const nn::Mlp& critic, const Batch& batch, std::span<const double> y, nn::Gradients& grad) {
  const int n = batch.size;
  nn::Mlp::Cache cache;
  const auto& q = critic.forward(batch.states, n, cache);
  std::vector<double> dq(q.size(), 0.0);
  double loss = 0.0;
  for (int b = 0; b < n; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    const auto i = bi * kNumActions + static_cast<std::size_t>(batch.actions[bi]);
    const double err = q[i] - y[bi];
    loss += 0.5 * err * err;
    dq[i] = err / n;
  }
  critic.backward(cache, dq, grad);
  return loss / n;
}

}  // namespace

CriticLoss critic_loss(const Batch& batch, const SacNetworks& nets, double gamma) {
  if (batch.size <= 0) throw std::invalid_argument("critic loss needs a nonempty batch");
  const auto y = critic_targets(batch, nets, gamma);
  CriticLoss out;
  out.loss1 = critic_regression(nets.critic1, batch, y, out.grad1);
  out.loss2 = critic_regression(nets.critic2, batch, y, out.grad2);
  return out;
}

ActorLoss actor_loss(const Batch& batch, const SacNetworks& nets) {
  if (batch.size <= 0) throw std::invalid_argument("actor loss needs a nonempty batch");
  const int n = batch.size;
  nn::Mlp::Cache cache;
  const auto& logits = nets.actor.forward(batch.states, n, cache);
  const auto pol = policy_from_logits(logits, n);
  const auto q1 = nets.critic1.predict(batch.states, n);
  const auto q2 = nets.critic2.predict(batch.states, n);
  const double alpha = nets.temperature();

  ActorLoss out;
  std::vector<double> dz(logits.size());
  for (int b = 0; b < n; ++b) {
    const auto base = static_cast<std::size_t>(b) * kNumActions;
    double f[kNumActions];
    double expected = 0.0;
    double entropy = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      const auto i = base + a;
      f[a] = alpha * pol.log_probs[i] - std::min(q1[i], q2[i]);
      expected += pol.probs[i] * f[a];
      entropy -= pol.probs[i] * pol.log_probs[i];
    }
    for (int a = 0; a < kNumActions; ++a) dz[base + a] = pol.probs[base + a] * (f[a] - expected) / n;
    out.loss += expected;
    out.mean_entropy += entropy;
  }
  out.loss /= n;
  out.mean_entropy /= n;
  nets.actor.backward(cache, dz, out.grad);
  return out;
}

TemperatureLoss temperature_loss(const Batch& batch, const SacNetworks& nets, double target_entropy) {
  if (batch.size <= 0) throw std::invalid_argument("temperature loss needs a nonempty batch");
  const int n = batch.size;
  const auto pol = policy(nets.actor, batch.states, n);
  double entropy = 0.0;
  for (std::size_t i = 0; i < pol.probs.size(); ++i) entropy -= pol.probs[i] * pol.log_probs[i];
  entropy /= n;
  const double alpha = nets.temperature();
  return {alpha * (entropy - target_entropy), alpha * (entropy - target_entropy)};
}

void soft_update(SacNetworks& nets, double tau) {
  nets.target1.blend_from(nets.critic1, tau);
  nets.target2.blend_from(nets.critic2, tau);
}

int select_action(std::span<const double> features, const SacNetworks& nets, ActionMode mode, std::mt19937_64& rng) {
  const auto p = policy(nets.actor, features, 1);
  if (mode == ActionMode::kGreedy) return p.probs[1] > p.probs[0] ? 1 : 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < p.probs[1] ? 1 : 0;
}

// --- learner --------------------------------------------------------------------

namespace {

SacNetworks fresh_networks(int state_dim, const SacConfig& config) {
  config.validate();
  std::mt19937_64 init(config.seed ^ 0x9e3779b97f4a7c15ULL);
  return SacNetworks::create(state_dim, config.hidden, config.initial_temperature, init);
}

}  // namespace

SacAgent::SacAgent(int state_dim, SacConfig config) : SacAgent(fresh_networks(state_dim, config), config) {}

SacAgent::SacAgent(SacNetworks nets, SacConfig config)
    : config_(std::move(config)),
      rng_(config_.seed),
      nets_(std::move(nets)),
      memory_(config_.memory_capacity, nets_.state_dim()),
      actor_opt_(nets_.actor, config_.lr_actor),
      critic1_opt_(nets_.critic1, config_.lr_critic),
      critic2_opt_(nets_.critic2, config_.lr_critic),
      temperature_opt_(config_.lr_temperature) {
  config_.validate();
}

int SacAgent::act(std::span<const double> features, ActionMode mode) {
  return select_action(features, nets_, mode, rng_);
}

void SacAgent::observe(const Transition& t) { memory_.push(t); }

bool SacAgent::update() {
  if (memory_.size() < std::max(config_.warmup, config_.batch_size)) return false;
  const Batch batch = memory_.sample(config_.batch_size, rng_);

  auto critic = critic_loss(batch, nets_, config_.gamma);
  if (!std::isfinite(critic.loss1) || !std::isfinite(critic.loss2)) throw DivergenceError("critic loss is not finite");
  critic1_opt_.step(nets_.critic1, critic.grad1);
  critic2_opt_.step(nets_.critic2, critic.grad2);

  auto actor = actor_loss(batch, nets_);
  if (!std::isfinite(actor.loss)) throw DivergenceError("actor loss is not finite");
  actor_opt_.step(nets_.actor, actor.grad);

  const auto temp = temperature_loss(batch, nets_, config_.target_entropy);
  if (!std::isfinite(temp.loss)) throw DivergenceError("temperature loss is not finite");
  temperature_opt_.step(nets_.log_temperature, temp.grad_log_temperature);

  soft_update(nets_, config_.tau);
  last_ = {critic.loss1 + critic.loss2, actor.loss, temp.loss};
  ++updates_;
  return true;
}

std::vector<EpisodeCurve> train(Environment& env, SacAgent& agent, const TrainSchedule& schedule,
                                const std::function<void(const EpisodeCurve&)>& on_episode) {
  if (schedule.scene_block < 1) throw std::invalid_argument("scene block must be >= 1");
  std::mt19937_64 rng(schedule.seed);
  std::vector<EpisodeCurve> curves;
  curves.reserve(static_cast<std::size_t>(std::max(0, schedule.episodes)));
  for (int ep = 0; ep < schedule.episodes; ++ep) {
    const bool new_scene = ep % schedule.scene_block == 0;
    std::vector<double> state = env.reset(new_scene, rng);
    EpisodeCurve curve;
    curve.episode = ep;
    curve.scene_block = ep / schedule.scene_block;
    curve.energy_j = env.bootstrap_energy_j();
    int deviation_steps = 0;
    for (;;) {
      const int a = agent.act(state, ActionMode::kStochastic);
      auto step = env.step(a);
      agent.observe({state, step.action, step.reward, step.next_state, step.done});
      agent.update();
      curve.cumulative_reward += step.reward;
      curve.energy_j += step.energy_j;
      if (step.action == 1) ++curve.samples;
      if (step.deviation) {
        curve.mean_deviation += *step.deviation;
        ++deviation_steps;
      }
      if (step.done) break;
      state = std::move(step.next_state);
    }
    if (deviation_steps > 0) curve.mean_deviation /= deviation_steps;
    curves.push_back(curve);
    if (on_episode) on_episode(curve);
  }
  return curves;
}

std::string curves_to_csv(const std::vector<EpisodeCurve>& curves) {
  std::ostringstream out;
  out << "episode,cum_reward,energy_J,mean_deviation,samples,scene_block\n";
  char buf[256];
  for (const auto& c : curves) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d,%d\n", c.episode, c.cumulative_reward, c.energy_j,
                  c.mean_deviation, c.samples, c.scene_block);
    out << buf;
  }
  return out.str();
}

// --- snapshots -------------------------------------------------------------------

namespace {

json mlp_to_json(const nn::Mlp& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  return {{"sizes", net.sizes()}, {"layers", std::move(layers)}};
}

nn::Mlp mlp_from_json(const json& j) {
  nn::Mlp net;
  for (const auto& lj : j.at("layers")) {
    nn::DenseLayer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    if (l.weights.size() != static_cast<std::size_t>(l.in) * l.out || l.bias.size() != static_cast<std::size_t>(l.out)) {
      throw std::invalid_argument("snapshot layer has inconsistent shape");
    }
    if (!net.layers().empty() && net.layers().back().out != l.in) {
      throw std::invalid_argument("snapshot layers do not chain");
    }
    net.layers().push_back(std::move(l));
  }
  if (net.layers().empty()) throw std::invalid_argument("snapshot network has no layers");
  return net;
}

}  // namespace

std::string networks_to_json(const SacNetworks& nets) {
  json j = {{"format", "semsim-sac"},
            {"version", 1},
            {"log_temperature", nets.log_temperature},
            {"actor", mlp_to_json(nets.actor)},
            {"critic1", mlp_to_json(nets.critic1)},
            {"critic2", mlp_to_json(nets.critic2)},
            {"target1", mlp_to_json(nets.target1)},
            {"target2", mlp_to_json(nets.target2)}};
  return j.dump() + "\n";
}

SacNetworks networks_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "semsim-sac") throw std::invalid_argument("not a semsim-sac snapshot");
    if (j.at("version").get<int>() != 1) throw std::invalid_argument("unsupported snapshot version");
    SacNetworks n;
    n.log_temperature = j.at("log_temperature").get<double>();
    n.actor = mlp_from_json(j.at("actor"));
    n.critic1 = mlp_from_json(j.at("critic1"));
    n.critic2 = mlp_from_json(j.at("critic2"));
    n.target1 = mlp_from_json(j.at("target1"));
    n.target2 = mlp_from_json(j.at("target2"));
    const auto s = n.actor.sizes();
    for (const auto* c : {&n.critic1, &n.critic2, &n.target1, &n.target2}) {
      if (c->sizes() != s) throw std::invalid_argument("snapshot critic shape differs from actor");
    }
    if (n.actor.output_size() != kNumActions) throw std::invalid_argument("snapshot must have two action outputs");
    return n;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed snapshot: ") + e.what());
  }
}

}  // namespace semsim
