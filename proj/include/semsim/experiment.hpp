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

// End-to-end pipelines shared by the command-line tool and the acceptance run:
// training, policy comparison and the artifact manifest.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semsim/config.hpp"

namespace semsim {

struct TrainResult {
  SacNetworks networks;
  std::vector<EpisodeCurve> curves;
};

/// Trains on the config's training clips. `resume` continues from existing weights.
TrainResult run_training(const ExperimentConfig& config, const std::vector<FootageClip>& clips,
                         const SacNetworks* resume = nullptr,
                         const std::function<void(const EpisodeCurve&)>& on_episode = {});

/// Agent (greedy) plus the periodic baselines on each clip.
std::vector<ComparisonRow> run_evaluation(const ExperimentConfig& config, const SacNetworks& nets,
                                          const std::vector<FootageClip>& clips, int jobs = 1);

/// Start offset used for evaluation clip `i`.
int evaluation_offset(const ExperimentConfig& config, std::size_t i);

/// Collects output files and writes them with a manifest listing their digests.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::string dir);
  /// Writes `content` to dir/name and records its digest.
  void write(const std::string& name, const std::string& content);
  /// Writes manifest.json: config digest, seeds, version, outputs, wall time.
  void write_manifest(const std::string& command, const ExperimentConfig& config, double wall_seconds);

  struct Entry {
    std::string name;
    std::string digest;
    std::size_t bytes = 0;
  };
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<Entry> entries_;
};

std::string read_file(const std::string& path);

}  // namespace semsim
