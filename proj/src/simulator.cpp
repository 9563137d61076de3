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

#include "semsim/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <json.hpp>
#include <sstream>

#include "semsim/error.hpp"

namespace semsim {

using nlohmann::json;

double RewardConfig::sample_reward(double energy_mj) const { return w2 * std::log(1.0 + w1 * energy_mj); }

double RewardConfig::skip_reward(double penalized) const { return w3 - std::exp(w4 * penalized - 1.0); }

void RewardConfig::validate() const {
  if (!(w1 > 0.0)) throw ValidationError("reward w1 must be positive");
  if (deviation_threshold < 0.0 || kappa < 0.0) throw ValidationError("deviation threshold and kappa must be >= 0");
}

FadingParams ChannelConfig::fading() const { return {m, m_s, LinkBudget(link).g_bar()}; }

double ChannelConfig::resolved_energy_scale() const {
  if (energy_scale > 0.0) return energy_scale;
  const double e = expected_energy(static_cast<double>(kRecordBits) * anchor_vehicles, LinkBudget(link), fading());
  return anchor_mj * 1e-3 / e;
}

void ChannelConfig::validate() const {
  if (!(link.bandwidth_hz > 0.0)) throw ValidationError("bandwidth must be positive");
  if (!(link.distance_m > 0.0)) throw ValidationError("distance must be positive");
  fading().validate();
  if (energy_scale <= 0.0 && (anchor_vehicles < 1 || !(anchor_mj > 0.0))) {
    throw ValidationError("energy anchor needs a positive vehicle count and energy");
  }
}

void EpisodeConfig::validate() const {
  if (steps < 2) throw ValidationError("episodes need at least two steps");
  predictor.validate();
  channel.validate();
  reward.validate();
  if (state.window < 0) throw ValidationError("observation window must be >= 0");
}

// --- policies ----------------------------------------------------------------

PeriodicPolicy::PeriodicPolicy(int period, int t0) : period_(period), t0_(t0) {
  if (period < 1) throw ValidationError("sampling period must be >= 1");
}

std::string PeriodicPolicy::name() const { return "periodic-" + std::to_string(period_); }

int PeriodicPolicy::decide(std::span<const double>, int t) {
  const int r = (t - t0_) % period_;
  return r == 0 ? 1 : 0;
}

std::unique_ptr<SamplingPolicy> PeriodicPolicy::clone() const { return std::make_unique<PeriodicPolicy>(period_, t0_); }

AgentPolicy::AgentPolicy(std::shared_ptr<const SacNetworks> nets, ActionMode mode, std::uint64_t seed, std::string name)
    : nets_(std::move(nets)), mode_(mode), seed_(seed), name_(std::move(name)), rng_(seed) {
  if (!nets_) throw ValidationError("agent policy needs networks");
}

int AgentPolicy::decide(std::span<const double> features, int) { return select_action(features, *nets_, mode_, rng_); }

std::unique_ptr<SamplingPolicy> AgentPolicy::clone() const {
  return std::make_unique<AgentPolicy>(nets_, mode_, seed_, name_);
}

// --- environment -------------------------------------------------------------

SemanticEnvironment::SemanticEnvironment(std::shared_ptr<const std::vector<FootageClip>> clips, EpisodeConfig config)
    : clips_(std::move(clips)), config_(std::move(config)), link_(config_.channel.link) {
  config_.validate();
  if (!clips_ || clips_->empty()) throw ValidationError("environment needs at least one clip");
  for (const auto& c : *clips_) {
    if (c.size() < 2) throw ValidationError("clip '" + c.name + "' has fewer than two frames");
  }
  fading_ = config_.channel.fading();
  energy_scale_ = config_.channel.resolved_energy_scale();
  if (config_.state.gain_nominal <= 0.0) config_.state.gain_nominal = link_.g_bar();
}

const SceneAnnotation& SemanticEnvironment::frame(int t) const {
  return (*clips_)[clip_].frames[static_cast<std::size_t>(offset_ + 1 + t)];
}

bool SemanticEnvironment::has_frame(int t) const {
  return offset_ + 1 + t < static_cast<int>((*clips_)[clip_].size());
}

int SemanticEnvironment::max_offset(std::size_t clip) const {
  const int n = static_cast<int>(clips_->at(clip).size());
  return std::max(0, n - (config_.steps + 2));
}

double SemanticEnvironment::packet_energy_j(double bits) const { return expected_energy(bits, link_, fading_); }

double SemanticEnvironment::charge(double bits) {
  const double e = config_.channel.stochastic_energy ? sampled_energy(bits, link_, fading_, energy_rng_)
                                                     : packet_energy_j(bits);
  metrics_.total_energy_j += e;
  return e;
}

double SemanticEnvironment::gain_feature() const { return link_.g_bar(); }

void SemanticEnvironment::observe() {
  const auto& s = frame(t_);
  chi_history_.push_back(semantic_change(s, last_sampled_));
  state_ = build_state(static_cast<double>(kRecordBits) * static_cast<double>(s.vehicle_count()), chi_history_,
                       gain_feature(), t_ - last_sampled_time_, config_.state);
}

std::vector<double> SemanticEnvironment::begin(std::size_t clip, int offset) {
  if (clip >= clips_->size()) throw ValidationError("clip index out of range");
  const auto& c = (*clips_)[clip];
  if (offset < 0 || offset + 2 > static_cast<int>(c.size())) throw ValidationError("start offset out of range");
  clip_ = clip;
  offset_ = offset;
  has_scene_ = true;
  std::seed_seq seq{static_cast<std::uint64_t>(config_.seed), static_cast<std::uint64_t>(clip),
                    static_cast<std::uint64_t>(offset)};
  energy_rng_.seed(seq);

  metrics_ = EpisodeMetrics{};
  metrics_.clip = c.name;
  metrics_.start_offset = offset;
  deviation_steps_ = 0;
  deviation_sum_ = 0.0;
  force_next_ = false;

  // Bootstrap: frames at t = -1 and t = 0 are always delivered.
  const SemanticMessage first = encode_message(frame(-1));
  const SemanticMessage second = encode_message(frame(0));
  metrics_.bootstrap_energy_j = charge(static_cast<double>(first.size_bits));
  metrics_.bootstrap_energy_j += charge(static_cast<double>(second.size_bits));
  destination_ = std::make_unique<Destination>(config_.predictor);
  destination_->initialize(first, second, 0);
  last_sampled_ = frame(0);
  last_sampled_time_ = 0;
  chi_history_.assign(1, 0.0);

  done_ = !has_frame(1);
  t_ = 1;
  if (done_) {
    metrics_.truncated = true;
    state_ = build_state(0.0, chi_history_, gain_feature(), 0, config_.state);
  } else {
    observe();
  }
  return state_.features(config_.state);
}

std::vector<double> SemanticEnvironment::reset(bool new_scene, std::mt19937_64& rng) {
  if (new_scene || !has_scene_) {
    std::uniform_int_distribution<std::size_t> pick_clip(0, clips_->size() - 1);
    const std::size_t clip = pick_clip(rng);
    std::uniform_int_distribution<int> pick_offset(0, max_offset(clip));
    const int offset = pick_offset(rng);
    return begin(clip, offset);
  }
  return begin(clip_, offset_);
}

Environment::Step SemanticEnvironment::step(int action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  const int t = t_;
  const SceneAnnotation& s = frame(t);

  StepTrace tr;
  tr.t = t;
  tr.frame_index = s.frame_index;
  tr.forced = force_next_;
  tr.packet_bits = state_.packet_bits;
  tr.chi = chi_history_.back();
  tr.action = force_next_ ? 1 : (action != 0 ? 1 : 0);

  Step out;
  out.action = tr.action;
  if (tr.action == 1) {
    const SemanticMessage msg = encode_message(s);
    tr.energy_j = charge(static_cast<double>(msg.size_bits));
    const auto shown = destination_->step(t, &msg);
    tr.reward = config_.reward.sample_reward(reward_energy_mj(tr.energy_j));
    tr.received_deviation = shown.deviation;
    tr.resample_requested = shown.feedback == Feedback::kRequestResample;
    last_sampled_ = s;
    last_sampled_time_ = t;
    ++metrics_.sample_count;
    if (tr.forced) ++metrics_.forced_count;
    if (config_.record_layouts) metrics_.displayed.push_back(shown.displayed);
  } else {
    const auto shown = destination_->step(t, nullptr);
    const double d = prediction_deviation(destination_layout(s, config_.predictor), shown.displayed);
    const double dh = penalized_deviation(d, config_.reward.deviation_threshold, config_.reward.kappa);
    tr.deviation = d;
    tr.penalized = dh;
    tr.reward = config_.reward.skip_reward(dh);
    deviation_sum_ += d;
    ++deviation_steps_;
    metrics_.mean_deviation = deviation_sum_ / deviation_steps_;
    if (config_.record_layouts) metrics_.displayed.push_back(shown.displayed);
  }
  force_next_ = tr.resample_requested;

  metrics_.cumulative_reward += tr.reward;
  metrics_.steps = t;
  out.reward = tr.reward;
  out.energy_j = tr.energy_j;
  out.deviation = tr.deviation;
  metrics_.trace.push_back(std::move(tr));

  const bool exhausted = !has_frame(t + 1);
  done_ = t >= config_.steps || exhausted;
  if (exhausted && t < config_.steps) metrics_.truncated = true;
  if (!done_) {
    t_ = t + 1;
    observe();
  }
  out.done = done_;
  out.next_state = state_.features(config_.state);
  return out;
}

EpisodeMetrics run_episode(SemanticEnvironment& env, SamplingPolicy& policy, std::size_t clip, int offset) {
  policy.reset();
  std::vector<double> features = env.begin(clip, offset);
  while (!env.done()) {
    const int a = policy.decide(features, env.time());
    auto step = env.step(a);
    features = std::move(step.next_state);
  }
  return env.metrics();
}

EpisodeMetrics run_episode(std::shared_ptr<const std::vector<FootageClip>> clips, const EpisodeConfig& config,
                           SamplingPolicy& policy, std::size_t clip, int offset) {
  SemanticEnvironment env(std::move(clips), config);
  return run_episode(env, policy, clip, offset);
}

std::vector<ComparisonRow> compare_policies(std::shared_ptr<const std::vector<FootageClip>> clips,
                                            const EpisodeConfig& config,
                                            const std::vector<std::shared_ptr<const SamplingPolicy>>& policies,
                                            const std::vector<int>& offsets, int jobs) {
  if (!clips || clips->empty()) throw ValidationError("comparison needs at least one clip");
  if (policies.empty()) throw ValidationError("comparison needs at least one policy");
  if (offsets.size() != clips->size()) throw ValidationError("one start offset per clip is required");
  const int tasks = static_cast<int>(clips->size() * policies.size());
  std::vector<ComparisonRow> rows(static_cast<std::size_t>(tasks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (int k = 0; k < tasks; ++k) {
    const auto c = static_cast<std::size_t>(k) / policies.size();
    const auto p = static_cast<std::size_t>(k) % policies.size();
    try {
      auto policy = policies[p]->clone();
      rows[static_cast<std::size_t>(k)] = {(*clips)[c].name, policy->name(),
                                           run_episode(clips, config, *policy, c, offsets[c])};
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "clip,policy,cum_reward,energy_J,mean_deviation,samples,forced,bootstrap_energy_J,start_offset,truncated\n";
  char buf[512];
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%d,%d,%.17g,%d,%d\n", r.clip.c_str(), r.policy.c_str(),
                  m.cumulative_reward, m.total_energy_j, m.mean_deviation, m.sample_count, m.forced_count,
                  m.bootstrap_energy_j, m.start_offset, m.truncated ? 1 : 0);
    out << buf;
  }
  return out.str();
}

std::string comparison_to_json(const std::vector<ComparisonRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    arr.push_back({{"clip", r.clip},
                   {"policy", r.policy},
                   {"cum_reward", m.cumulative_reward},
                   {"energy_J", m.total_energy_j},
                   {"mean_deviation", m.mean_deviation},
                   {"samples", m.sample_count},
                   {"forced", m.forced_count},
                   {"bootstrap_energy_J", m.bootstrap_energy_j},
                   {"start_offset", m.start_offset},
                   {"truncated", m.truncated}});
  }
  return arr.dump(2) + "\n";
}

std::string trace_to_jsonl(const EpisodeMetrics& metrics) {
  std::string out;
  for (const auto& s : metrics.trace) {
    json j = {{"t", s.t},
              {"frame", s.frame_index},
              {"action", s.action},
              {"forced", s.forced},
              {"packet_bits", s.packet_bits},
              {"chi", s.chi},
              {"energy_J", s.energy_j},
              {"reward", s.reward},
              {"resample_requested", s.resample_requested}};
    j["deviation"] = s.deviation ? json(*s.deviation) : json(nullptr);
    j["penalized_deviation"] = s.penalized ? json(*s.penalized) : json(nullptr);
    j["received_deviation"] = s.received_deviation ? json(*s.received_deviation) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string layouts_to_json(const std::vector<VisualLayout>& layouts) {
  json frames = json::array();
  int w = 0, h = 0;
  for (const auto& g : layouts) {
    w = g.width();
    h = g.height();
    json rows = json::array();
    for (int y = 0; y < h; ++y) {
      std::string row(static_cast<std::size_t>(w), '0');
      for (int x = 0; x < w; ++x) row[static_cast<std::size_t>(x)] = static_cast<char>('0' + g.at(x, y));
      rows.push_back(std::move(row));
    }
    frames.push_back(std::move(rows));
  }
  return json{{"width", w}, {"height", h}, {"frames", std::move(frames)}}.dump() + "\n";
}

}  // namespace semsim
