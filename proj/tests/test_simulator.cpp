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

#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "semsim/error.hpp"
#include "semsim/simulator.hpp"

using namespace semsim;

namespace {

FootageClip static_clip(int frames, int vehicles = 3) {
  FootageClip clip;
  clip.name = "static";
  for (int i = 0; i < frames; ++i) {
    SceneAnnotation s;
    s.frame_index = i;
    for (int v = 0; v < vehicles; ++v) {
      const double x = 0.1 + 0.25 * v;
      s.vehicles.push_back({v + 1, VehicleClass::kCar, {x, 0.3, x + 0.1, 0.4}});
    }
    clip.frames.push_back(s);
  }
  return clip;
}

std::shared_ptr<const std::vector<FootageClip>> clips_of(std::vector<FootageClip> clips) {
  return std::make_shared<const std::vector<FootageClip>>(std::move(clips));
}

std::shared_ptr<const std::vector<FootageClip>> traffic_clips() {
  TrafficGenConfig a, b;
  a.seed = 3;
  a.spawn_rate = 0.1;
  a.speed_mean = 0.02;
  b.seed = 4;
  b.spawn_rate = 0.2;
  b.speed_mean = 0.008;
  b.speed_jitter = 0.001;
  return clips_of({generate_traffic(a, 260, "a"), generate_traffic(b, 260, "b")});
}

// Picks action 1 with probability `p`, seeded per episode.
class CoinPolicy final : public SamplingPolicy {
 public:
  explicit CoinPolicy(double p, std::uint64_t seed) : p_(p), seed_(seed), rng_(seed) {}
  std::string name() const override { return "coin"; }
  void reset() override { rng_.seed(seed_); }
  int decide(std::span<const double>, int) override { return std::bernoulli_distribution(p_)(rng_) ? 1 : 0; }
  std::unique_ptr<SamplingPolicy> clone() const override { return std::make_unique<CoinPolicy>(p_, seed_); }

 private:
  double p_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("reward terms") {
    const RewardConfig r;
    CHECK(r.sample_reward(0.0) == 0.0);
    CHECK(r.sample_reward(0.015) == doctest::Approx(-6.0 * std::log(1.15)).epsilon(1e-14));
    CHECK(r.skip_reward(0.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(r.skip_reward(1.0) == doctest::Approx(1.0 - std::exp(1.0)).epsilon(1e-14));
    CHECK(r.skip_reward(0.0) > r.skip_reward(0.07));
    CHECK(r.skip_reward(0.07) > r.skip_reward(penalized_deviation(0.0701)));
  }

  TEST_CASE("energy scale anchors an 8-vehicle packet") {
    EpisodeConfig cfg;
    SemanticEnvironment env(clips_of({static_clip(10)}), cfg);
    CHECK(env.reward_energy_mj(env.packet_energy_j(176.0)) == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(env.packet_energy_j(0.0) == 0.0);
    CHECK(env.packet_energy_j(352.0) == doctest::Approx(2 * env.packet_energy_j(176.0)));
  }

  TEST_CASE("never sampling a static scene") {
    EpisodeConfig cfg;
    ConstantPolicy never(0);
    const auto m = run_episode(clips_of({static_clip(200)}), cfg, never, 0, 0);
    CHECK(m.steps == 150);
    CHECK(m.sample_count == 0);
    CHECK(m.mean_deviation == 0.0);
    CHECK(m.total_energy_j == m.bootstrap_energy_j);
    CHECK(m.cumulative_reward == doctest::Approx(150 * cfg.reward.skip_reward(0.0)));
    CHECK_FALSE(m.truncated);
  }

  TEST_CASE("always sampling") {
    EpisodeConfig cfg;
    ConstantPolicy always(1);
    const auto clips = clips_of({static_clip(200)});
    SemanticEnvironment env(clips, cfg);
    const auto m = run_episode(env, always, 0, 0);
    const double e = env.packet_energy_j(66.0);
    CHECK(m.sample_count == 150);
    CHECK(m.forced_count == 0);
    CHECK(m.mean_deviation == 0.0);
    CHECK(m.bootstrap_energy_j == doctest::Approx(2 * e));
    CHECK(m.total_energy_j == doctest::Approx(152 * e));
    CHECK(m.cumulative_reward == doctest::Approx(150 * cfg.reward.sample_reward(env.reward_energy_mj(e))));
  }

  TEST_CASE("periodic baseline timing") {
    PeriodicPolicy p(5);
    CHECK(p.name() == "periodic-5");
    CHECK(p.decide({}, 0) == 1);
    CHECK(p.decide({}, 3) == 0);
    CHECK(p.decide({}, 10) == 1);
    CHECK_THROWS(PeriodicPolicy(0));

    EpisodeConfig cfg;
    const auto m = run_episode(clips_of({static_clip(200)}), cfg, p, 0, 0);
    CHECK(m.sample_count == 30);
    for (const auto& s : m.trace) CHECK(s.action == (s.t % 5 == 0 ? 1 : 0));
  }

  TEST_CASE("episode timeline and accounting") {
    EpisodeConfig cfg;
    const auto clips = traffic_clips();
    SemanticEnvironment env(clips, cfg);
    for (double p : {0.1, 0.3, 0.7}) {
      CoinPolicy coin(p, 11);
      const int offset = 17;
      const auto m = run_episode(env, coin, 1, offset);
      const auto& clip = (*clips)[1];
      REQUIRE(m.trace.size() == 150);
      double reward = 0.0, energy = m.bootstrap_energy_j, dev = 0.0;
      int samples = 0, forced = 0, skipped = 0;
      bool force = false;
      SceneAnnotation last = clip.frames[offset + 1];
      for (const auto& s : m.trace) {
        CHECK(s.frame_index == offset + 1 + s.t);
        CHECK(s.forced == force);
        if (force) CHECK(s.action == 1);
        // chi compares the current frame with the last delivered one.
        CHECK(s.chi == semantic_change(clip.frames[std::size_t(s.frame_index)], last));
        if (s.action == 1) {
          const double e = env.packet_energy_j(22.0 * double(clip.frames[std::size_t(s.frame_index)].vehicles.size()));
          CHECK(s.energy_j == doctest::Approx(e).epsilon(1e-12));
          CHECK(s.reward == doctest::Approx(cfg.reward.sample_reward(env.reward_energy_mj(e))).epsilon(1e-12));
          CHECK_FALSE(s.deviation.has_value());
          REQUIRE(s.received_deviation.has_value());
          CHECK(s.resample_requested == (*s.received_deviation > cfg.predictor.deviation_threshold));
          last = clip.frames[std::size_t(s.frame_index)];
          ++samples;
          forced += s.forced;
        } else {
          REQUIRE(s.deviation.has_value());
          CHECK(s.energy_j == 0.0);
          CHECK(*s.penalized == penalized_deviation(*s.deviation));
          CHECK(s.reward == cfg.reward.skip_reward(*s.penalized));
          dev += *s.deviation;
          ++skipped;
        }
        force = s.resample_requested;
        reward += s.reward;
        energy += s.energy_j;
      }
      CHECK(m.cumulative_reward == doctest::Approx(reward).epsilon(1e-12));
      CHECK(m.total_energy_j == doctest::Approx(energy).epsilon(1e-12));
      CHECK(m.sample_count == samples);
      CHECK(m.forced_count == forced);
      CHECK(m.mean_deviation == doctest::Approx(skipped ? dev / skipped : 0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("observation shape and content") {
    EpisodeConfig cfg;
    cfg.state.window = 4;
    const auto clips = traffic_clips();
    SemanticEnvironment env(clips, cfg);
    const auto s0 = env.begin(0, 0);
    CHECK(s0.size() == std::size_t(cfg.state.dim()));
    CHECK(env.state_dim() == cfg.state.dim());
    const auto& f = (*clips)[0].frames;
    CHECK(s0[0] == doctest::Approx(22.0 * double(f[2].vehicles.size()) / cfg.state.packet_norm_bits));
    CHECK(s0[1] == doctest::Approx(semantic_change(f[2], f[1]) / cfg.state.chi_norm));
    CHECK(s0[2] == 0.0);
    const auto step = env.step(1);
    CHECK(step.next_state.size() == s0.size());
    // Gain feature is the link's average gain normalized to 1.
    CHECK(step.next_state.back() == doctest::Approx(1.0));
  }

  TEST_CASE("episodes are deterministic") {
    EpisodeConfig cfg;
    cfg.channel.stochastic_energy = true;
    const auto clips = traffic_clips();
    CoinPolicy a(0.4, 2), b(0.4, 2);
    const auto m1 = run_episode(clips, cfg, a, 0, 5);
    const auto m2 = run_episode(clips, cfg, b, 0, 5);
    CHECK(trace_to_jsonl(m1) == trace_to_jsonl(m2));
    CHECK(m1.total_energy_j == m2.total_energy_j);
  }

  TEST_CASE("stochastic energy averages to the closed form") {
    EpisodeConfig cfg;
    cfg.channel.stochastic_energy = true;
    const auto clips = clips_of({static_clip(200)});
    SemanticEnvironment env(clips, cfg);
    ConstantPolicy always(1);
    double total = 0.0;
    for (int off = 0; off < 40; ++off) total += run_episode(env, always, 0, off).total_energy_j;
    CHECK(total / (40 * 152) == doctest::Approx(env.packet_energy_j(66.0)).epsilon(0.03));
  }

  TEST_CASE("short clips truncate") {
    EpisodeConfig cfg;
    ConstantPolicy never(0);
    const auto m = run_episode(clips_of({static_clip(50)}), cfg, never, 0, 0);
    CHECK(m.truncated);
    CHECK(m.steps == 48);
    SemanticEnvironment env(clips_of({static_clip(50)}), cfg);
    CHECK_THROWS_AS(env.begin(0, 49), ValidationError);
    CHECK_THROWS_AS(env.begin(1, 0), ValidationError);
  }

  TEST_CASE("policy comparison is ordered and independent of the job count") {
    EpisodeConfig cfg;
    std::vector<std::shared_ptr<const SamplingPolicy>> policies;
    for (int p : {4, 5, 6, 7}) policies.push_back(std::make_shared<PeriodicPolicy>(p));
    policies.push_back(std::make_shared<CoinPolicy>(0.3, 8));
    const auto clips = traffic_clips();
    const auto serial = compare_policies(clips, cfg, policies, {3, 9}, 1);
    const auto parallel = compare_policies(clips, cfg, policies, {3, 9}, 4);
    REQUIRE(serial.size() == 10);
    CHECK(serial[0].clip == "a");
    CHECK(serial[0].policy == "periodic-4");
    CHECK(serial[5].clip == "b");
    CHECK(serial[9].policy == "coin");
    CHECK(serial[5].metrics.start_offset == 9);
    CHECK(comparison_to_csv(serial) == comparison_to_csv(parallel));
    CHECK(comparison_to_json(serial) == comparison_to_json(parallel));
  }

  TEST_CASE("recorded layouts") {
    EpisodeConfig cfg;
    cfg.record_layouts = true;
    cfg.steps = 10;
    PeriodicPolicy p(3);
    const auto m = run_episode(clips_of({static_clip(20)}), cfg, p, 0, 0);
    CHECK(m.displayed.size() == 10);
    const auto text = layouts_to_json(m.displayed);
    CHECK(text.find("\"width\":120") != std::string::npos);
  }

  TEST_CASE("config validation") {
    EpisodeConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS(cfg.validate());
    ChannelConfig ch;
    ch.m = 1.0;
    CHECK_THROWS(ch.validate());
  }
}
