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

// Scene streams: UA-DETRAC annotation parsing, the native clip JSON format and
// a synthetic bidirectional traffic generator.
//
// Native clip JSON:
//   {"name": "...", "frame_width": 960, "frame_height": 540,
//    "frames": [[[track_id, class, b1, b2, b3, b4], ...], ...]}
// Frame i of "frames" has frame_index i.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "semsim/layout.hpp"

namespace semsim {

struct FootageClip {
  std::string name;
  int frame_width = 960;
  int frame_height = 540;
  std::vector<SceneAnnotation> frames;

  std::size_t size() const { return frames.size(); }
  friend bool operator==(const FootageClip&, const FootageClip&) = default;
};

/// Throws ValidationError if frame indices are not 0,1,2,... or any scene is invalid.
void validate(const FootageClip& clip);

/// Maps a DETRAC vehicle_type string to a class; unknown types become kOthers.
VehicleClass vehicle_class_from_name(std::string_view name);
std::string_view vehicle_class_name(VehicleClass cls);

/// Parses the sequence/frame/target_list/target subset of a DETRAC annotation.
/// Boxes are normalized by the source dimensions and clamped to [0,1]; gaps in
/// frame numbering become empty frames. Throws ParseError with the line number.
FootageClip parse_detrac_xml(std::string_view document, int source_width = 960, int source_height = 540);
FootageClip load_detrac_xml(const std::string& path, int source_width = 960, int source_height = 540);

/// Writes a clip back as DETRAC XML in source pixel units.
std::string write_detrac_xml(const FootageClip& clip);

std::string clip_to_json(const FootageClip& clip);
FootageClip clip_from_json(std::string_view text);
FootageClip load_clip_json(const std::string& path);

struct TrafficGenConfig {
  int lanes = 2;              // per direction
  double spawn_rate = 0.08;   // Poisson mean per STI, whole road
  double speed_mean = 0.015;  // normalized width per STI
  double speed_spread = 0.3;  // per-vehicle relative speed spread (uniform +-)
  double speed_jitter = 0.0;  // per-step additive jitter bound
  std::array<double, kNumClasses> class_mix{0.7, 0.1, 0.15, 0.05};
  std::uint64_t seed = 1;

  void validate() const;
};

/// Vehicles enter at the frame edge of their lane, move along it with a
/// per-vehicle speed plus bounded jitter, and despawn once fully outside.
/// Track ids are never reused within a clip.
FootageClip generate_traffic(const TrafficGenConfig& config, int num_frames, std::string name = "synthetic");

/// Spawn and despawn counts observed while generating, for conservation checks.
struct TrafficLedger {
  std::vector<int> spawns;
  std::vector<int> despawns;
};
FootageClip generate_traffic(const TrafficGenConfig& config, int num_frames, std::string name,
                             TrafficLedger* ledger);

/// Concatenates clips generated from successive configs into one clip with
/// continuous frame indices and track ids. Used for clips whose density or
/// speed changes over time.
FootageClip generate_traffic_phases(const std::vector<std::pair<TrafficGenConfig, int>>& phases, std::string name);
FootageClip generate_traffic_phases(const std::vector<std::pair<TrafficGenConfig, int>>& phases, std::string name,
                                    TrafficLedger* ledger);

}  // namespace semsim
