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

#include "semsim/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "semsim/error.hpp"

namespace semsim {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) throw ValidationError("unknown key " + path_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

TrafficGenConfig read_phase(const json& j, const std::string& path, int& frames) {
  Section s(j, path);
  TrafficGenConfig c;
  s.get("frames", frames);
  s.get("lanes", c.lanes);
  s.get("spawn_rate", c.spawn_rate);
  s.get("speed_mean", c.speed_mean);
  s.get("speed_spread", c.speed_spread);
  s.get("speed_jitter", c.speed_jitter);
  s.get("class_mix", c.class_mix);
  s.finish();
  return c;
}

ClipSource read_clip(const json& j, const std::string& path) {
  Section s(j, path);
  ClipSource c;
  std::string type = "synthetic";
  s.get("type", type);
  s.get("name", c.name);
  s.get("path", c.path);
  s.get("seed", c.seed);
  s.get("width", c.source_width);
  s.get("height", c.source_height);
  if (type == "synthetic") {
    c.kind = ClipSource::Kind::kSynthetic;
  } else if (type == "detrac") {
    c.kind = ClipSource::Kind::kDetrac;
  } else if (type == "json") {
    c.kind = ClipSource::Kind::kJson;
  } else {
    throw ValidationError(path + ".type must be synthetic, detrac or json");
  }
  if (const json* phases = s.child("phases")) {
    if (!phases->is_array()) throw ValidationError(path + ".phases must be an array");
    for (std::size_t i = 0; i < phases->size(); ++i) {
      int frames = 0;
      auto cfg = read_phase((*phases)[i], path + ".phases[" + std::to_string(i) + "]", frames);
      c.phases.emplace_back(cfg, frames);
    }
  }
  s.finish();
  if (c.kind == ClipSource::Kind::kSynthetic && c.phases.empty()) {
    throw ValidationError(path + " needs at least one phase");
  }
  if (c.kind != ClipSource::Kind::kSynthetic && c.path.empty()) throw ValidationError(path + ".path is required");
  return c;
}

std::vector<ClipSource> read_clips(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + " must be an array");
  std::vector<ClipSource> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_clip(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json clip_json(const ClipSource& c) {
  json j;
  switch (c.kind) {
    case ClipSource::Kind::kSynthetic: {
      j = {{"type", "synthetic"}, {"name", c.name}, {"seed", c.seed}};
      json phases = json::array();
      for (const auto& [p, frames] : c.phases) {
        phases.push_back({{"frames", frames},
                          {"lanes", p.lanes},
                          {"spawn_rate", p.spawn_rate},
                          {"speed_mean", p.speed_mean},
                          {"speed_spread", p.speed_spread},
                          {"speed_jitter", p.speed_jitter},
                          {"class_mix", p.class_mix}});
      }
      j["phases"] = std::move(phases);
      break;
    }
    case ClipSource::Kind::kDetrac:
      j = {{"type", "detrac"}, {"name", c.name}, {"path", c.path}, {"width", c.source_width}, {"height", c.source_height}};
      break;
    case ClipSource::Kind::kJson:
      j = {{"type", "json"}, {"name", c.name}, {"path", c.path}};
      break;
  }
  return j;
}

ClipSource synthetic(std::string name, std::uint64_t seed, std::vector<std::pair<TrafficGenConfig, int>> phases) {
  ClipSource c;
  c.name = std::move(name);
  c.seed = seed;
  c.phases = std::move(phases);
  return c;
}

TrafficGenConfig traffic(double spawn_rate, double speed_mean) {
  TrafficGenConfig t;
  t.spawn_rate = spawn_rate;
  t.speed_mean = speed_mean;
  return t;
}

}  // namespace

FootageClip ClipSource::load(const std::string& base_dir) const {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_relative() && !base_dir.empty()) fp = std::filesystem::path(base_dir) / fp;
    return fp.string();
  };
  switch (kind) {
    case Kind::kSynthetic: {
      auto phases_seeded = phases;
      for (std::size_t i = 0; i < phases_seeded.size(); ++i) phases_seeded[i].first.seed = seed + i;
      return generate_traffic_phases(phases_seeded, name.empty() ? "synthetic" : name);
    }
    case Kind::kDetrac: {
      FootageClip clip = load_detrac_xml(resolve(path), source_width, source_height);
      if (!name.empty()) clip.name = name;
      return clip;
    }
    case Kind::kJson: {
      FootageClip clip = load_clip_json(resolve(path));
      if (!name.empty()) clip.name = name;
      return clip;
    }
  }
  throw std::logic_error("unknown clip source kind");
}

void ExperimentConfig::apply_seed(std::uint64_t s) {
  seed = s;
  episode.seed = s;
  agent.seed = s;
  training.seed = s;
}

void ExperimentConfig::validate() const {
  episode.validate();
  agent.validate();
  if (training.episodes < 0) throw ValidationError("training episodes must be >= 0");
  if (training.scene_block < 1) throw ValidationError("scene block must be >= 1");
  for (int p : eval_periods) {
    if (p < 1) throw ValidationError("evaluation periods must be >= 1");
  }
  if (eval_offsets.empty()) throw ValidationError("at least one evaluation offset is required");
  for (int o : eval_offsets) {
    if (o < 0) throw ValidationError("evaluation offsets must be >= 0");
  }
  if (eval_offsets.size() != 1 && eval_offsets.size() != eval_clips.size()) {
    throw ValidationError("give one evaluation offset, or one per evaluation clip");
  }
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.train_clips = {
      synthetic("train-light-fast", 101, {{traffic(0.05, 0.022), 600}}),
      synthetic("train-dense-slow", 202, {{traffic(0.16, 0.008), 600}}),
      synthetic("train-mixed", 303, {{traffic(0.05, 0.02), 200}, {traffic(0.16, 0.008), 200}, {traffic(0.1, 0.014), 200}}),
  };
  c.eval_clips = {
      synthetic("eval-light-fast", 1101, {{traffic(0.05, 0.022), 300}}),
      synthetic("eval-dense-slow", 1202, {{traffic(0.16, 0.008), 300}}),
      synthetic("eval-mixed", 1303, {{traffic(0.05, 0.02), 100}, {traffic(0.16, 0.008), 100}, {traffic(0.1, 0.014), 100}}),
  };
  c.eval_offsets = {40};
  return c;
}

ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = default_experiment();
  c.base_dir = base_dir;
  Section top(root, "config");
  top.get("seed", c.seed);
  c.apply_seed(c.seed);

  if (const json* j = top.child("episode")) {
    Section s(*j, top.path("episode"));
    s.get("steps", c.episode.steps);
    s.get("record_layouts", c.episode.record_layouts);
    s.finish();
  }
  if (const json* j = top.child("channel")) {
    auto& ch = c.episode.channel;
    Section s(*j, top.path("channel"));
    s.get("bandwidth_hz", ch.link.bandwidth_hz);
    s.get("snr_threshold_db", ch.link.snr_threshold_db);
    s.get("noise_psd_dbm_hz", ch.link.noise_psd_dbm_hz);
    s.get("distance_m", ch.link.distance_m);
    s.get("m", ch.m);
    s.get("m_s", ch.m_s);
    s.get("energy_scale", ch.energy_scale);
    s.get("anchor_mj", ch.anchor_mj);
    s.get("anchor_vehicles", ch.anchor_vehicles);
    s.get("stochastic_energy", ch.stochastic_energy);
    s.finish();
  }
  if (const json* j = top.child("reward")) {
    auto& r = c.episode.reward;
    Section s(*j, top.path("reward"));
    s.get("w1", r.w1);
    s.get("w2", r.w2);
    s.get("w3", r.w3);
    s.get("w4", r.w4);
    s.get("deviation_threshold", r.deviation_threshold);
    s.get("kappa", r.kappa);
    s.finish();
  }
  if (const json* j = top.child("predictor")) {
    auto& p = c.episode.predictor;
    Section s(*j, top.path("predictor"));
    s.get("horizon", p.horizon);
    s.get("width", p.width);
    s.get("height", p.height);
    s.get("deviation_threshold", p.deviation_threshold);
    s.get("association_gate", p.association_gate);
    s.get("snap_to_codec_grid", p.snap_to_codec_grid);
    s.get("history_capacity", p.history_capacity);
    s.get("velocity_baseline", p.velocity_baseline);
    s.finish();
  }
  if (const json* j = top.child("state")) {
    auto& e = c.episode.state;
    Section s(*j, top.path("state"));
    s.get("window", e.window);
    s.get("packet_norm_bits", e.packet_norm_bits);
    s.get("chi_norm", e.chi_norm);
    s.get("gain_nominal", e.gain_nominal);
    s.get("include_gap", e.include_gap);
    s.get("gap_norm", e.gap_norm);
    s.finish();
  }
  if (const json* j = top.child("agent")) {
    auto& a = c.agent;
    Section s(*j, top.path("agent"));
    s.get("hidden", a.hidden);
    s.get("lr_actor", a.lr_actor);
    s.get("lr_critic", a.lr_critic);
    s.get("lr_temperature", a.lr_temperature);
    s.get("gamma", a.gamma);
    s.get("tau", a.tau);
    s.get("target_entropy", a.target_entropy);
    s.get("initial_temperature", a.initial_temperature);
    s.get("batch_size", a.batch_size);
    s.get("memory_capacity", a.memory_capacity);
    s.get("warmup", a.warmup);
    s.finish();
  }
  if (const json* j = top.child("training")) {
    Section s(*j, top.path("training"));
    s.get("episodes", c.training.episodes);
    s.get("scene_block", c.training.scene_block);
    if (const json* clips = s.child("clips")) c.train_clips = read_clips(*clips, s.path("clips"));
    s.finish();
  }
  if (const json* j = top.child("evaluation")) {
    Section s(*j, top.path("evaluation"));
    s.get("periods", c.eval_periods);
    s.get("offsets", c.eval_offsets);
    if (const json* clips = s.child("clips")) c.eval_clips = read_clips(*clips, s.path("clips"));
    s.finish();
  }
  if (const json* j = top.child("output")) {
    Section s(*j, top.path("output"));
    s.get("dir", c.output_dir);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string experiment_to_json(const ExperimentConfig& c) {
  const auto& ch = c.episode.channel;
  const auto& r = c.episode.reward;
  const auto& p = c.episode.predictor;
  const auto& e = c.episode.state;
  const auto& a = c.agent;
  json train_clips = json::array();
  for (const auto& s : c.train_clips) train_clips.push_back(clip_json(s));
  json eval_clips = json::array();
  for (const auto& s : c.eval_clips) eval_clips.push_back(clip_json(s));
  json j = {
      {"seed", c.seed},
      {"episode", {{"steps", c.episode.steps}, {"record_layouts", c.episode.record_layouts}}},
      {"channel",
       {{"bandwidth_hz", ch.link.bandwidth_hz},
        {"snr_threshold_db", ch.link.snr_threshold_db},
        {"noise_psd_dbm_hz", ch.link.noise_psd_dbm_hz},
        {"distance_m", ch.link.distance_m},
        {"m", ch.m},
        {"m_s", ch.m_s},
        {"energy_scale", ch.energy_scale},
        {"anchor_mj", ch.anchor_mj},
        {"anchor_vehicles", ch.anchor_vehicles},
        {"stochastic_energy", ch.stochastic_energy}}},
      {"reward",
       {{"w1", r.w1}, {"w2", r.w2}, {"w3", r.w3}, {"w4", r.w4}, {"deviation_threshold", r.deviation_threshold},
        {"kappa", r.kappa}}},
      {"predictor",
       {{"horizon", p.horizon},
        {"width", p.width},
        {"height", p.height},
        {"deviation_threshold", p.deviation_threshold},
        {"association_gate", p.association_gate},
        {"snap_to_codec_grid", p.snap_to_codec_grid},
        {"history_capacity", p.history_capacity},
        {"velocity_baseline", p.velocity_baseline}}},
      {"state",
       {{"window", e.window},
        {"packet_norm_bits", e.packet_norm_bits},
        {"chi_norm", e.chi_norm},
        {"gain_nominal", e.gain_nominal},
        {"include_gap", e.include_gap},
        {"gap_norm", e.gap_norm}}},
      {"agent",
       {{"hidden", a.hidden},
        {"lr_actor", a.lr_actor},
        {"lr_critic", a.lr_critic},
        {"lr_temperature", a.lr_temperature},
        {"gamma", a.gamma},
        {"tau", a.tau},
        {"target_entropy", a.target_entropy},
        {"initial_temperature", a.initial_temperature},
        {"batch_size", a.batch_size},
        {"memory_capacity", a.memory_capacity},
        {"warmup", a.warmup}}},
      {"training", {{"episodes", c.training.episodes}, {"scene_block", c.training.scene_block}, {"clips", train_clips}}},
      {"evaluation", {{"periods", c.eval_periods}, {"offsets", c.eval_offsets}, {"clips", eval_clips}}},
      {"output", {{"dir", c.output_dir}}},
  };
  return j.dump(2) + "\n";
}

std::vector<FootageClip> load_clips(const std::vector<ClipSource>& sources, const std::string& base_dir) {
  std::vector<FootageClip> clips;
  clips.reserve(sources.size());
  for (const auto& s : sources) clips.push_back(s.load(base_dir));
  return clips;
}

}  // namespace semsim
