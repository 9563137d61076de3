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

#include "semsim/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "semsim/digest.hpp"
#include "semsim/error.hpp"

#ifndef SEMSIM_VERSION
#define SEMSIM_VERSION "unknown"
#endif

namespace semsim {

using nlohmann::json;

TrainResult run_training(const ExperimentConfig& config, const std::vector<FootageClip>& clips,
                         const SacNetworks* resume, const std::function<void(const EpisodeCurve&)>& on_episode) {
  config.validate();
  auto shared = std::make_shared<const std::vector<FootageClip>>(clips);
  SemanticEnvironment env(shared, config.episode);
  std::optional<SacAgent> agent;
  if (resume) {
    if (resume->state_dim() != env.state_dim()) {
      throw ValidationError("snapshot input width " + std::to_string(resume->state_dim()) +
                            " does not match the configured state width " + std::to_string(env.state_dim()));
    }
    agent.emplace(*resume, config.agent);
  } else {
    agent.emplace(env.state_dim(), config.agent);
  }
  TrainResult r;
  r.curves = train(env, *agent, config.training, on_episode);
  r.networks = agent->networks();
  return r;
}

int evaluation_offset(const ExperimentConfig& config, std::size_t i) {
  return config.eval_offsets.size() == 1 ? config.eval_offsets.front() : config.eval_offsets.at(i);
}

std::vector<ComparisonRow> run_evaluation(const ExperimentConfig& config, const SacNetworks& nets,
                                          const std::vector<FootageClip>& clips, int jobs) {
  config.validate();
  if (clips.empty()) throw ValidationError("evaluation needs at least one clip");
  if (nets.state_dim() != config.episode.state.dim()) {
    throw ValidationError("snapshot input width " + std::to_string(nets.state_dim()) +
                          " does not match the configured state width " + std::to_string(config.episode.state.dim()));
  }
  std::vector<std::shared_ptr<const SamplingPolicy>> policies;
  policies.push_back(std::make_shared<AgentPolicy>(std::make_shared<const SacNetworks>(nets)));
  for (int p : config.eval_periods) policies.push_back(std::make_shared<PeriodicPolicy>(p));
  std::vector<int> offsets;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const int max_off = std::max(0, static_cast<int>(clips[i].size()) - (config.episode.steps + 2));
    offsets.push_back(std::min(evaluation_offset(config, i), max_off));
  }
  return compare_policies(std::make_shared<const std::vector<FootageClip>>(clips), config.episode, policies, offsets,
                          jobs);
}

ArtifactWriter::ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::path(dir_) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
  entries_.push_back({name, digest_hex(content), content.size()});
}

void ArtifactWriter::write_manifest(const std::string& command, const ExperimentConfig& config, double wall_seconds) {
  json outputs = json::array();
  for (const auto& e : entries_) outputs.push_back({{"file", e.name}, {"fnv1a64", e.digest}, {"bytes", e.bytes}});
  const std::string cfg = experiment_to_json(config);
  json m = {{"command", command},
            {"version", SEMSIM_VERSION},
            {"config_fnv1a64", digest_hex(cfg)},
            {"seeds",
             {{"experiment", config.seed},
              {"episode", config.episode.seed},
              {"agent", config.agent.seed},
              {"training", config.training.seed}}},
            {"outputs", std::move(outputs)},
            {"wall_seconds", wall_seconds}};
  const auto path = std::filesystem::path(dir_) / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << m.dump(2) << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace semsim
