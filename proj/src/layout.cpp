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

#include "semsim/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "semsim/error.hpp"
#include "semsim/kernels.hpp"

namespace semsim {

VehicleClass vehicle_class_from_code(int c) {
  if (c < 1 || c > kNumClasses) {
    throw ValidationError("vehicle class code out of range: " + std::to_string(c));
  }
  return static_cast<VehicleClass>(c);
}

bool BoundingBox::valid() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  return unit(b1) && unit(b2) && unit(b3) && unit(b4) && b1 <= b3 && b2 <= b4;
}

void validate(const BoundingBox& box) {
  if (!box.valid()) {
    throw ValidationError("bounding box outside [0,1] or inverted: (" + std::to_string(box.b1) + ", " +
                          std::to_string(box.b2) + ", " + std::to_string(box.b3) + ", " + std::to_string(box.b4) +
                          ")");
  }
}

void validate(const SceneAnnotation& scene) {
  if (scene.frame_index < 0) throw ValidationError("negative frame index");
  std::set<int> ids;
  for (const auto& v : scene.vehicles) {
    validate(v.box);
    vehicle_class_from_code(code(v.cls));
    if (!ids.insert(v.track_id).second) {
      throw ValidationError("duplicate track id " + std::to_string(v.track_id));
    }
  }
}

int quantize_coordinate(double value) {
  const int q = static_cast<int>(std::floor(value * kCoordLevels));
  return std::clamp(q, 0, kCoordLevels - 1);
}

double dequantize_coordinate(int q) { return (q + 0.5) / kCoordLevels; }

namespace {

class BitWriter {
 public:
  void put(std::uint32_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) {
      if (used_ % 8 == 0) bytes_.push_back(0);
      if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (used_ % 8));
      ++used_;
    }
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t get(int bits) {
    std::uint32_t v = 0;
    for (int i = 0; i < bits; ++i, ++pos_) {
      v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u);
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t payload_bytes(std::size_t records) { return (records * kRecordBits + 7) / 8; }

}  // namespace

SemanticMessage encode_message(const SceneAnnotation& scene) {
  if (scene.vehicles.size() > kMaxVehiclesPerMessage) {
    throw ValidationError("scene has " + std::to_string(scene.vehicles.size()) + " vehicles; cap is " +
                          std::to_string(kMaxVehiclesPerMessage));
  }
  BitWriter out;
  for (const auto& v : scene.vehicles) {
    validate(v.box);
    out.put(static_cast<std::uint32_t>(code(vehicle_class_from_code(code(v.cls))) - 1), 2);
    for (double c : {v.box.b1, v.box.b2, v.box.b3, v.box.b4}) {
      out.put(static_cast<std::uint32_t>(quantize_coordinate(c)), kCoordBits);
    }
  }
  SemanticMessage msg;
  msg.payload = out.take();
  msg.vehicle_count = scene.vehicles.size();
  msg.size_bits = msg.vehicle_count * kRecordBits;
  return msg;
}

SceneAnnotation decode_message(const SemanticMessage& msg, int frame_index) {
  if (msg.size_bits % kRecordBits != 0) {
    throw DecodeError("message length " + std::to_string(msg.size_bits) + " bits is not a multiple of 22");
  }
  const std::size_t count = msg.size_bits / kRecordBits;
  if (count != msg.vehicle_count) throw DecodeError("vehicle count does not match message length");
  if (count > kMaxVehiclesPerMessage) throw DecodeError("message exceeds the vehicle cap");
  if (msg.payload.size() != payload_bytes(count)) throw DecodeError("payload size does not match message length");

  SceneAnnotation scene;
  scene.frame_index = frame_index;
  scene.vehicles.reserve(count);
  BitReader in(msg.payload);
  for (std::size_t i = 0; i < count; ++i) {
    VehicleRecord rec;
    rec.track_id = static_cast<int>(i);
    rec.cls = vehicle_class_from_code(static_cast<int>(in.get(2)) + 1);
    const int q1 = static_cast<int>(in.get(kCoordBits));
    const int q2 = static_cast<int>(in.get(kCoordBits));
    const int q3 = static_cast<int>(in.get(kCoordBits));
    const int q4 = static_cast<int>(in.get(kCoordBits));
    if (q1 > q3 || q2 > q4) throw DecodeError("record " + std::to_string(i) + " has inverted corners");
    rec.box = {dequantize_coordinate(q1), dequantize_coordinate(q2), dequantize_coordinate(q3),
               dequantize_coordinate(q4)};
    scene.vehicles.push_back(rec);
  }
  return scene;
}

SemanticMessage message_from_bytes(std::span<const std::uint8_t> bytes) {
  const std::size_t count = bytes.size() * 8 / kRecordBits;
  if (payload_bytes(count) != bytes.size()) {
    throw DecodeError("payload of " + std::to_string(bytes.size()) + " bytes is not a whole number of records");
  }
  const std::size_t bits = count * kRecordBits;
  for (std::size_t pos = bits; pos < bytes.size() * 8; ++pos) {
    if ((bytes[pos / 8] >> (7 - pos % 8)) & 1u) throw DecodeError("nonzero padding bits");
  }
  SemanticMessage msg;
  msg.payload.assign(bytes.begin(), bytes.end());
  msg.vehicle_count = count;
  msg.size_bits = bits;
  return msg;
}

SceneAnnotation quantize_scene(const SceneAnnotation& scene) {
  SceneAnnotation out = scene;
  for (auto& v : out.vehicles) {
    validate(v.box);
    v.box = {dequantize_coordinate(quantize_coordinate(v.box.b1)), dequantize_coordinate(quantize_coordinate(v.box.b2)),
             dequantize_coordinate(quantize_coordinate(v.box.b3)), dequantize_coordinate(quantize_coordinate(v.box.b4))};
  }
  return out;
}

VisualLayout::VisualLayout(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ValidationError("layout dimensions must be positive");
  cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

PixelRect pixel_rect(const BoundingBox& box, int width, int height) {
  auto span_of = [](double lo, double hi, int n) {
    int a = std::clamp(static_cast<int>(std::floor(lo * n)), 0, n);
    int b = std::clamp(static_cast<int>(std::ceil(hi * n)), 0, n);
    if (b <= a) {
      if (a >= n) a = n - 1;
      b = a + 1;
    }
    return std::pair{a, b};
  };
  const auto [x0, x1] = span_of(box.b1, box.b3, width);
  const auto [y0, y1] = span_of(box.b2, box.b4, height);
  return {x0, y0, x1, y1};
}

VisualLayout rasterize(const SceneAnnotation& scene, int width, int height) {
  VisualLayout grid(width, height);
  for (const auto& v : scene.vehicles) {
    validate(v.box);
    const auto r = pixel_rect(v.box, width, height);
    const auto value = static_cast<std::uint8_t>(code(v.cls));
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) grid.set(x, y, value);
    }
  }
  return grid;
}

double box_intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::max(0.0, std::min(a.b3, b.b3) - std::max(a.b1, b.b1));
  const double h = std::max(0.0, std::min(a.b4, b.b4) - std::max(a.b2, b.b2));
  return w * h;
}

double box_change_term(const BoundingBox& current, const BoundingBox& sampled) {
  const double a = current.area();
  const double a_hat = sampled.area();
  const double inter = box_intersection_area(current, sampled);
  const double uni = a + a_hat - inter;
  if (uni <= 0.0) return 0.0;
  return (a + a_hat - 2.0 * inter) / (2.0 * uni);
}

double semantic_change(const SceneAnnotation& current, const SceneAnnotation& last_sampled) {
  std::map<int, const BoundingBox*> now;
  std::map<int, const BoundingBox*> then;
  for (const auto& v : current.vehicles) now[v.track_id] = &v.box;
  for (const auto& v : last_sampled.vehicles) then[v.track_id] = &v.box;

  std::set<int> ids;
  for (const auto& [id, _] : now) ids.insert(id);
  for (const auto& [id, _] : then) ids.insert(id);

  double chi = 0.0;
  for (int id : ids) {
    auto a = now.find(id);
    auto b = then.find(id);
    if (a == now.end() || b == then.end()) {
      chi += 0.5;
    } else {
      chi += box_change_term(*a->second, *b->second);
    }
  }
  return chi;
}

ClassPixelCounts class_pixel_counts(const VisualLayout& real, const VisualLayout& predicted) {
  if (real.width() != predicted.width() || real.height() != predicted.height()) {
    throw ValidationError("layout dimensions differ");
  }
  std::array<std::int64_t, 25> joint{};
  kernels::joint_class_histogram(real.cells(), predicted.cells(), joint);
  ClassPixelCounts counts;
  for (int r = 0; r <= kNumClasses; ++r) {
    for (int p = 0; p <= kNumClasses; ++p) {
      const auto n = joint[static_cast<std::size_t>(r * 5 + p)];
      counts.real[r] += n;
      counts.predicted[p] += n;
      if (r == p) counts.overlap[r] += n;
    }
  }
  return counts;
}

double prediction_deviation(const VisualLayout& real, const VisualLayout& predicted) {
  const auto c = class_pixel_counts(real, predicted);
  double d = 0.0;
  for (int k = 1; k <= kNumClasses; ++k) {
    const auto total = c.real[k] + c.predicted[k];
    if (total == 0) continue;
    d += static_cast<double>(total - 2 * c.overlap[k]) / static_cast<double>(2 * total);
  }
  return d;
}

double penalized_deviation(double deviation, double threshold, double kappa) {
  if (deviation < 0.0) throw DomainError("deviation must be non-negative");
  if (deviation <= threshold) return deviation;
  return std::min(deviation + kappa, 1.0);
}

}  // namespace semsim
