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

#include "semsim/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "semsim/error.hpp"

namespace semsim {

void PredictorConfig::validate() const {
  if (horizon < 1) throw ValidationError("prediction horizon must be >= 1");
  if (width <= 0 || height <= 0) throw ValidationError("layout dimensions must be positive");
  if (deviation_threshold < 0.0) throw ValidationError("deviation threshold must be >= 0");
  if (velocity_baseline < 1) throw ValidationError("velocity baseline must be >= 1");
}

std::vector<SceneAnnotation> extrapolate_scenes(const SceneAnnotation& older, const SceneAnnotation& newer, int gap,
                                                int horizon) {
  if (gap < 1) throw ValidationError("prediction gap must be >= 1");
  if (horizon < 1) throw ValidationError("prediction horizon must be >= 1");
  std::map<int, BoundingBox> before;
  for (const auto& v : older.vehicles) before.emplace(v.track_id, v.box);

  struct Track {
    const VehicleRecord* rec;
    BoundingBox velocity;
  };
  std::vector<Track> tracks;
  tracks.reserve(newer.vehicles.size());
  for (const auto& v : newer.vehicles) {
    BoundingBox vel{};
    if (auto it = before.find(v.track_id); it != before.end()) {
      const auto& b = it->second;
      vel = {(v.box.b1 - b.b1) / gap, (v.box.b2 - b.b2) / gap, (v.box.b3 - b.b3) / gap, (v.box.b4 - b.b4) / gap};
    }
    tracks.push_back({&v, vel});
  }

  std::vector<SceneAnnotation> out(static_cast<std::size_t>(horizon));
  for (int k = 1; k <= horizon; ++k) {
    auto& scene = out[static_cast<std::size_t>(k - 1)];
    scene.frame_index = newer.frame_index + k;
    for (const auto& t : tracks) {
      const auto& b = t.rec->box;
      double x0 = b.b1 + k * t.velocity.b1;
      double y0 = b.b2 + k * t.velocity.b2;
      double x1 = b.b3 + k * t.velocity.b3;
      double y1 = b.b4 + k * t.velocity.b4;
      if (x0 > x1) x0 = x1 = 0.5 * (x0 + x1);
      if (y0 > y1) y0 = y1 = 0.5 * (y0 + y1);
      const bool outside = x1 < 0.0 || x0 > 1.0 || y1 < 0.0 || y0 > 1.0;
      const bool moving = t.velocity != BoundingBox{};
      if (outside || (moving && (x1 <= 0.0 || x0 >= 1.0 || y1 <= 0.0 || y0 >= 1.0))) continue;
      BoundingBox box{std::clamp(x0, 0.0, 1.0), std::clamp(y0, 0.0, 1.0), std::clamp(x1, 0.0, 1.0),
                      std::clamp(y1, 0.0, 1.0)};
      scene.vehicles.push_back({t.rec->track_id, t.rec->cls, box});
    }
  }
  return out;
}

std::vector<VisualLayout> extrapolate_layouts(const VisualLayout& older, const VisualLayout& newer, int gap,
                                              int horizon) {
  if (gap < 1) throw ValidationError("prediction gap must be >= 1");
  if (horizon < 1) throw ValidationError("prediction horizon must be >= 1");
  if (older.width() != newer.width() || older.height() != newer.height()) {
    throw ValidationError("layout dimensions differ");
  }
  const int w = newer.width();
  const int h = newer.height();

  struct Moments {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
  };
  auto centroids = [&](const VisualLayout& g) {
    std::array<Moments, kNumClasses + 1> m{};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int c = g.at(x, y);
        if (c == 0) continue;
        m[c].sx += x;
        m[c].sy += y;
        m[c].n += 1;
      }
    }
    return m;
  };
  const auto a = centroids(older);
  const auto b = centroids(newer);
  std::array<double, kNumClasses + 1> vx{}, vy{};
  for (int c = 1; c <= kNumClasses; ++c) {
    if (a[c].n == 0 || b[c].n == 0) continue;
    vx[c] = (b[c].sx / b[c].n - a[c].sx / a[c].n) / gap;
    vy[c] = (b[c].sy / b[c].n - a[c].sy / a[c].n) / gap;
  }

  std::vector<VisualLayout> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int k = 1; k <= horizon; ++k) {
    VisualLayout g(w, h);
    for (int c = 1; c <= kNumClasses; ++c) {
      if (b[c].n == 0) continue;
      const int dx = static_cast<int>(std::lround(k * vx[c]));
      const int dy = static_cast<int>(std::lround(k * vy[c]));
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (newer.at(x, y) != c) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx >= 0 && nx < w && ny >= 0 && ny < h) g.set(nx, ny, static_cast<std::uint8_t>(c));
        }
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

VisualLayout destination_layout(const SceneAnnotation& scene, const PredictorConfig& config) {
  if (config.snap_to_codec_grid) return rasterize(quantize_scene(scene), config.width, config.height);
  return rasterize(scene, config.width, config.height);
}

std::vector<PredictedFrame> ConstantVelocityPredictor::predict(const PredictedFrame& older,
                                                               const PredictedFrame& newer, int gap,
                                                               int horizon) const {
  std::vector<PredictedFrame> out;
  out.reserve(static_cast<std::size_t>(horizon));
  if (older.scene && newer.scene) {
    for (auto& s : extrapolate_scenes(*older.scene, *newer.scene, gap, horizon)) {
      auto layout = destination_layout(s, config_);
      out.push_back({std::move(s), std::move(layout)});
    }
  } else {
    for (auto& g : extrapolate_layouts(older.layout, newer.layout, gap, horizon)) {
      out.push_back({std::nullopt, std::move(g)});
    }
  }
  return out;
}

SceneAnnotation associate_tracks(const SceneAnnotation& decoded, const SceneAnnotation& reference, double gate,
                                 int& next_id) {
  struct Pair {
    double dist;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < decoded.vehicles.size(); ++i) {
    const auto& d = decoded.vehicles[i];
    for (std::size_t j = 0; j < reference.vehicles.size(); ++j) {
      const auto& r = reference.vehicles[j];
      if (r.cls != d.cls) continue;
      const double dist = std::hypot(d.box.center_x() - r.box.center_x(), d.box.center_y() - r.box.center_y());
      if (dist <= gate) pairs.push_back({dist, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) { return std::tie(a.dist, a.i, a.j) < std::tie(b.dist, b.i, b.j); });

  SceneAnnotation out = decoded;
  std::vector<bool> used_i(decoded.vehicles.size(), false);
  std::vector<bool> used_j(reference.vehicles.size(), false);
  for (const auto& p : pairs) {
    if (used_i[p.i] || used_j[p.j]) continue;
    used_i[p.i] = used_j[p.j] = true;
    out.vehicles[p.i].track_id = reference.vehicles[p.j].track_id;
  }
  for (std::size_t i = 0; i < out.vehicles.size(); ++i) {
    if (!used_i[i]) out.vehicles[i].track_id = next_id++;
  }
  return out;
}

Destination::Destination(PredictorConfig config, std::shared_ptr<const FramePredictor> predictor)
    : config_(config), predictor_(std::move(predictor)) {
  config_.validate();
  if (!predictor_) throw ValidationError("predictor must not be null");
}

Destination::Destination(PredictorConfig config)
    : Destination(config, std::make_shared<ConstantVelocityPredictor>(config)) {}

namespace {

void keep_received(DestinationState& s, const PredictorConfig& config, const PredictedFrame& frame, int time) {
  s.received.push_back({frame, time});
  const auto cap = static_cast<std::size_t>(config.velocity_baseline) + 1;
  while (s.received.size() > cap) s.received.pop_front();
}

void remember(DestinationState& s, const PredictorConfig& config, PredictedFrame frame, int time) {
  s.history.push_back(frame.layout);
  while (s.history.size() > config.history_capacity) s.history.pop_front();
  s.last_two.push_back({std::move(frame), time});
  if (s.last_two.size() > 2) s.last_two.erase(s.last_two.begin());
}

}  // namespace

void Destination::initialize(const SemanticMessage& first, const SemanticMessage& second, int time) {
  DestinationState s;
  SceneAnnotation a = associate_tracks(decode_message(first, time - 1), {}, 0.0, s.next_track_id);
  SceneAnnotation b = associate_tracks(decode_message(second, time), a, config_.association_gate, s.next_track_id);
  PredictedFrame fa{a, destination_layout(a, config_)};
  PredictedFrame fb{b, destination_layout(b, config_)};
  for (auto& p : predictor_->predict(fa, fb, 1, config_.horizon)) s.pending.push_back(std::move(p));
  s.last_sampled_time = time;
  s.last_sampled_scene = b;
  s.last_sampled_layout = fb.layout;
  keep_received(s, config_, fa, time - 1);
  keep_received(s, config_, fb, time);
  remember(s, config_, std::move(fa), time - 1);
  remember(s, config_, std::move(fb), time);
  s.current_time = time;
  s.initialized = true;
  state_ = std::move(s);
}

DestinationOutput Destination::step(int time, const SemanticMessage* received) {
  return advance(state_, config_, *predictor_, time, received);
}

std::pair<DestinationState, DestinationOutput> Destination::transition(const DestinationState& state,
                                                                       const PredictorConfig& config,
                                                                       const FramePredictor& predictor, int time,
                                                                       const SemanticMessage* received) {
  DestinationState next = state;
  auto out = advance(next, config, predictor, time, received);
  return {std::move(next), std::move(out)};
}

DestinationOutput Destination::advance(DestinationState& s, const PredictorConfig& config,
                                       const FramePredictor& predictor, int time, const SemanticMessage* received) {
  if (!s.initialized) throw std::logic_error("destination used before initialization");
  if (time != s.current_time + 1) throw std::logic_error("destination must advance one STI at a time");

  DestinationOutput out;
  if (s.pending.empty()) {
    // Chain from the two most recently displayed frames, one STI apart.
    const auto& older = s.last_two.front().frame;
    const auto& newer = s.last_two.back().frame;
    for (auto& p : predictor.predict(older, newer, 1, config.horizon)) s.pending.push_back(std::move(p));
    out.repredicted_from_predictions = true;
  }
  if (s.pending.empty()) throw std::logic_error("no prediction available for the current STI");
  PredictedFrame predicted = std::move(s.pending.front());
  s.pending.pop_front();

  if (received) {
    out.received = true;
    const SceneAnnotation decoded = decode_message(*received, time);
    const SceneAnnotation& reference = predicted.scene ? *predicted.scene
                                       : s.last_sampled_scene ? *s.last_sampled_scene
                                                              : SceneAnnotation{};
    SceneAnnotation scene = associate_tracks(decoded, reference, config.association_gate, s.next_track_id);
    PredictedFrame real{scene, destination_layout(scene, config)};
    const double d = prediction_deviation(real.layout, predicted.layout);
    out.deviation = d;
    if (d > config.deviation_threshold) out.feedback = Feedback::kRequestResample;

    const DestinationState::Stamped* base = &s.received.front();
    for (const auto& r : s.received) {
      if (time - r.time >= config.velocity_baseline) base = &r;
    }
    s.pending.clear();
    for (auto& p : predictor.predict(base->frame, real, time - base->time, config.horizon)) {
      s.pending.push_back(std::move(p));
    }
    keep_received(s, config, real, time);
    s.last_sampled_time = time;
    s.last_sampled_scene = scene;
    s.last_sampled_layout = real.layout;
    out.displayed = real.layout;
    remember(s, config, std::move(real), time);
  } else {
    out.displayed = predicted.layout;
    remember(s, config, std::move(predicted), time);
  }
  s.current_time = time;
  return out;
}

}  // namespace semsim
