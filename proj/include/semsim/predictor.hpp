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

// Destination-side predictive frame interpolation.
//
// The destination shows exactly one layout per STI. Between received packets
// it pops layouts from a queue of at most P predictions; when the queue runs
// dry it chains a new round from the two most recently displayed predictions
// with a gap of one STI. A received packet is compared against the pending
// prediction for the same STI, displayed, and used with the previously
// received scene to predict the next P layouts.
#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "semsim/layout.hpp"

namespace semsim {

struct PredictorConfig {
  int horizon = 5;
  int width = kDefaultLayoutWidth;
  int height = kDefaultLayoutHeight;
  double deviation_threshold = 0.07;
  /// Max center distance for re-identifying a received vehicle with a predicted one.
  double association_gate = 0.15;
  /// Snap predicted boxes to the packet lattice before rasterizing.
  bool snap_to_codec_grid = true;
  std::size_t history_capacity = 256;
  /// Re-prediction after a received packet pairs the new packet with the latest received frame
  /// at least this many STIs older (the oldest kept one if none is).
  int velocity_baseline = 1;

  void validate() const;
};

/// A displayed or predicted frame. `scene` is present whenever box-level
/// information exists; raster-only frames carry just the layout.
struct PredictedFrame {
  std::optional<SceneAnnotation> scene;
  VisualLayout layout;
};

/// Box-level constant velocity extrapolation. Velocities are per box edge,
/// (newer - older) / gap for tracks present in both inputs, zero for tracks
/// only in `newer`. Boxes are clamped to [0,1]; tracks that leave the frame
/// entirely are dropped. Returns `horizon` scenes.
std::vector<SceneAnnotation> extrapolate_scenes(const SceneAnnotation& older, const SceneAnnotation& newer, int gap,
                                                int horizon);

/// Raster-only extrapolation: each class mask of `newer` is shifted by the
/// per-class centroid velocity measured against `older`.
std::vector<VisualLayout> extrapolate_layouts(const VisualLayout& older, const VisualLayout& newer, int gap,
                                              int horizon);

class FramePredictor {
 public:
  virtual ~FramePredictor() = default;
  /// Predict the `horizon` frames following `newer`, observed `gap` STIs after `older`.
  virtual std::vector<PredictedFrame> predict(const PredictedFrame& older, const PredictedFrame& newer, int gap,
                                              int horizon) const = 0;
};

class ConstantVelocityPredictor final : public FramePredictor {
 public:
  explicit ConstantVelocityPredictor(PredictorConfig config) : config_(config) {}
  std::vector<PredictedFrame> predict(const PredictedFrame& older, const PredictedFrame& newer, int gap,
                                      int horizon) const override;

 private:
  PredictorConfig config_;
};

/// Assigns track ids to a decoded scene by greedy same-class nearest-center
/// matching against `reference`. Unmatched vehicles get ids from `next_id`.
SceneAnnotation associate_tracks(const SceneAnnotation& decoded, const SceneAnnotation& reference, double gate,
                                 int& next_id);

enum class Feedback { kNone, kRequestResample };

struct DestinationState {
  struct Stamped {
    PredictedFrame frame;
    int time = 0;
  };
  /// Most recently displayed frames, newest last (at most two).
  std::vector<Stamped> last_two;
  std::deque<PredictedFrame> pending;
  int last_sampled_time = 0;
  std::optional<SceneAnnotation> last_sampled_scene;
  VisualLayout last_sampled_layout;
  /// Received frames, oldest first, kept for velocity baselines.
  std::deque<Stamped> received;
  /// Ring of displayed layouts, oldest first.
  std::deque<VisualLayout> history;
  int current_time = 0;
  int next_track_id = 1;
  bool initialized = false;
};

struct DestinationOutput {
  VisualLayout displayed;
  Feedback feedback = Feedback::kNone;
  /// Deviation between the received layout and its prediction (message steps only).
  std::optional<double> deviation;
  bool received = false;
  bool repredicted_from_predictions = false;
};

class Destination {
 public:
  Destination(PredictorConfig config, std::shared_ptr<const FramePredictor> predictor);
  explicit Destination(PredictorConfig config);

  /// Bootstrap from two consecutive packets received at `time - 1` and `time`.
  void initialize(const SemanticMessage& first, const SemanticMessage& second, int time);

  /// Advance to STI `time` (must be current_time + 1).
  DestinationOutput step(int time, const SemanticMessage* received);

  const DestinationState& state() const { return state_; }
  const PredictorConfig& config() const { return config_; }

  /// Deterministic transition on a copy: (state, input) -> (state', output).
  static std::pair<DestinationState, DestinationOutput> transition(const DestinationState& state,
                                                                   const PredictorConfig& config,
                                                                   const FramePredictor& predictor, int time,
                                                                   const SemanticMessage* received);

 private:
  static DestinationOutput advance(DestinationState& state, const PredictorConfig& config,
                                   const FramePredictor& predictor, int time, const SemanticMessage* received);

  PredictorConfig config_;
  std::shared_ptr<const FramePredictor> predictor_;
  DestinationState state_;
};

/// Layout of a scene at the destination: optionally snapped to the codec lattice.
VisualLayout destination_layout(const SceneAnnotation& scene, const PredictorConfig& config);

}  // namespace semsim
