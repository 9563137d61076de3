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

// Declarative experiment configuration (JSON).
//
// Every field has a default; unknown keys are rejected so typos surface as
// errors. Clip sources:
//   {"type": "synthetic", "name": "...", "seed": 7,
//    "phases": [{"frames": 400, "lanes": 2, "spawn_rate": 0.08, "speed_mean": 0.015,
//                "speed_spread": 0.3, "speed_jitter": 0.0, "class_mix": [0.7, 0.1, 0.15, 0.05]}]}
//   {"type": "detrac", "path": "seq.xml", "width": 960, "height": 540}
//   {"type": "json", "path": "clip.json"}
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semsim/agent.hpp"
#include "semsim/ingest.hpp"
#include "semsim/simulator.hpp"

namespace semsim {

struct ClipSource {
  enum class Kind { kSynthetic, kDetrac, kJson };
  Kind kind = Kind::kSynthetic;
  /// Empty keeps the name stored in the source file.
  std::string name;
  std::string path;
  int source_width = 960;
  int source_height = 540;
  std::uint64_t seed = 1;
  std::vector<std::pair<TrafficGenConfig, int>> phases;

  /// Builds or loads the clip. Relative paths resolve against `base_dir`.
  FootageClip load(const std::string& base_dir = "") const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  EpisodeConfig episode;
  SacConfig agent;
  TrainSchedule training;
  std::vector<ClipSource> train_clips;
  std::vector<ClipSource> eval_clips;
  std::vector<int> eval_periods{4, 5, 6, 7};
  /// Start offset of each evaluation episode (one per clip, or one for all).
  std::vector<int> eval_offsets{0};
  std::string output_dir = "out";
  /// Directory of the config file, for relative clip paths.
  std::string base_dir;

  /// Pushes the top-level seed into every component seed.
  void apply_seed(std::uint64_t seed);
  void validate() const;
};

/// Reference hyperparameter defaults with one synthetic training and evaluation roster.
ExperimentConfig default_experiment();

/// Throws ParseError for malformed JSON, ValidationError for bad values or unknown keys.
ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir = "");
ExperimentConfig load_experiment(const std::string& path);
std::string experiment_to_json(const ExperimentConfig& config);

std::vector<FootageClip> load_clips(const std::vector<ClipSource>& sources, const std::string& base_dir);

}  // namespace semsim
