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

// Scene and layout types, the semantic packet codec, rasterization and the
// layout-space metrics (semantic change, prediction deviation, penalty).
//
// Packet wire format, big-endian bit order, one 22-bit record per vehicle:
//
//   bit  21..20   19..15   14..10   9..5     4..0
//        class-1  q(b1)    q(b2)    q(b3)    q(b4)
//
// Records are concatenated MSB-first and the final byte is zero-padded. The
// record count is implied by the payload length: M = floor(8 * bytes / 22).
// Coordinates are quantized as q = clamp(floor(32 * b), 0, 31) and decoded to
// the cell center (q + 0.5) / 32.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace semsim {

inline constexpr int kNumClasses = 4;
inline constexpr int kRecordBits = 22;
inline constexpr int kCoordBits = 5;
inline constexpr int kCoordLevels = 1 << kCoordBits;
inline constexpr std::size_t kMaxVehiclesPerMessage = 64;
inline constexpr int kDefaultLayoutWidth = 120;
inline constexpr int kDefaultLayoutHeight = 80;

/// Vehicle category; the integer value is also the raster pixel value.
enum class VehicleClass : std::uint8_t { kCar = 1, kBus = 2, kVan = 3, kOthers = 4 };

VehicleClass vehicle_class_from_code(int code);
inline int code(VehicleClass c) { return static_cast<int>(c); }

/// Normalized corner-form box: (b1, b2) top-left, (b3, b4) bottom-right.
struct BoundingBox {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double b4 = 0.0;

  bool valid() const;
  double area() const { return (b3 - b1) * (b4 - b2); }
  double center_x() const { return 0.5 * (b1 + b3); }
  double center_y() const { return 0.5 * (b2 + b4); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Throws ValidationError unless 0 <= b1 <= b3 <= 1 and 0 <= b2 <= b4 <= 1.
void validate(const BoundingBox& box);

struct VehicleRecord {
  int track_id = 0;
  VehicleClass cls = VehicleClass::kCar;
  BoundingBox box;

  friend bool operator==(const VehicleRecord&, const VehicleRecord&) = default;
};

struct SceneAnnotation {
  int frame_index = 0;
  std::vector<VehicleRecord> vehicles;

  std::size_t vehicle_count() const { return vehicles.size(); }
  friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

/// Throws ValidationError on invalid boxes, duplicate track ids or a negative frame index.
void validate(const SceneAnnotation& scene);

struct SemanticMessage {
  std::vector<std::uint8_t> payload;
  std::size_t vehicle_count = 0;
  std::size_t size_bits = 0;

  friend bool operator==(const SemanticMessage&, const SemanticMessage&) = default;
};

int quantize_coordinate(double value);
double dequantize_coordinate(int q);

SemanticMessage encode_message(const SceneAnnotation& scene);

/// Decoded records carry track ids 0..M-1 in payload order.
SceneAnnotation decode_message(const SemanticMessage& msg, int frame_index = 0);

/// Rebuilds a message from raw payload bytes, inferring the record count.
SemanticMessage message_from_bytes(std::span<const std::uint8_t> bytes);

/// Quantize every box to the codec lattice, keeping track ids.
SceneAnnotation quantize_scene(const SceneAnnotation& scene);

/// Class-valued raster. Cell (x, y) lives at cells[y * width + x]; 0 is background.
class VisualLayout {
 public:
  VisualLayout() = default;
  VisualLayout(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return cells_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, std::uint8_t v) { cells_[static_cast<std::size_t>(y) * width_ + x] = v; }
  std::span<const std::uint8_t> cells() const { return cells_; }
  std::span<std::uint8_t> cells() { return cells_; }

  friend bool operator==(const VisualLayout&, const VisualLayout&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Integer pixel rectangle [x0, x1) x [y0, y1) painted by a box; never empty.
struct PixelRect {
  int x0, y0, x1, y1;
};
PixelRect pixel_rect(const BoundingBox& box, int width, int height);

/// Paint vehicles in list order; later vehicles overwrite earlier ones.
VisualLayout rasterize(const SceneAnnotation& scene, int width = kDefaultLayoutWidth,
                       int height = kDefaultLayoutHeight);

double box_intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Per-vehicle mismatch term of the semantic change degree, in [0, 0.5].
double box_change_term(const BoundingBox& current, const BoundingBox& sampled);

/// Cumulative box mismatch between the current scene and the last sampled one.
/// Vehicles are matched by track_id; a vehicle present in only one scene adds 0.5.
double semantic_change(const SceneAnnotation& current, const SceneAnnotation& last_sampled);

/// Per-class pixel counts: real, predicted and their intersection.
struct ClassPixelCounts {
  std::array<std::int64_t, kNumClasses + 1> real{};
  std::array<std::int64_t, kNumClasses + 1> predicted{};
  std::array<std::int64_t, kNumClasses + 1> overlap{};
};
ClassPixelCounts class_pixel_counts(const VisualLayout& real, const VisualLayout& predicted);

/// Sum over the four class masks of (n + n' - 2 n^) / (2 (n + n')).
double prediction_deviation(const VisualLayout& real, const VisualLayout& predicted);

/// D if D <= threshold, otherwise min(D + kappa, 1).
double penalized_deviation(double deviation, double threshold = 0.07, double kappa = 0.5);

}  // namespace semsim
