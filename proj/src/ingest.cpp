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

#include "semsim/ingest.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "semsim/error.hpp"

namespace semsim {

namespace pt = boost::property_tree;
using nlohmann::json;

void validate(const FootageClip& clip) {
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    if (clip.frames[i].frame_index != static_cast<int>(i)) {
      throw ValidationError("clip '" + clip.name + "': frame " + std::to_string(i) + " has index " +
                            std::to_string(clip.frames[i].frame_index));
    }
    validate(clip.frames[i]);
  }
}

VehicleClass vehicle_class_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "car") return VehicleClass::kCar;
  if (lower == "bus") return VehicleClass::kBus;
  if (lower == "van") return VehicleClass::kVan;
  return VehicleClass::kOthers;
}

std::string_view vehicle_class_name(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::kCar:
      return "car";
    case VehicleClass::kBus:
      return "bus";
    case VehicleClass::kVan:
      return "van";
    case VehicleClass::kOthers:
      return "others";
  }
  return "others";
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double required_number(const pt::ptree& attrs, const char* key, const std::string& where) {
  auto v = attrs.get_optional<std::string>(key);
  if (!v) throw ParseError(where + ": missing attribute '" + key + "'");
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ParseError(where + ": attribute '" + key + "' is not a number: '" + *v + "'");
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FootageClip parse_detrac_xml(std::string_view document, int source_width, int source_height) {
  if (source_width <= 0 || source_height <= 0) throw ParseError("source dimensions must be positive");
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message(),
                     static_cast<int>(e.line()));
  }
  auto seq = tree.get_child_optional("sequence");
  if (!seq) throw ParseError("missing <sequence> root element");

  FootageClip clip;
  clip.name = seq->get<std::string>("<xmlattr>.name", "detrac");
  clip.frame_width = source_width;
  clip.frame_height = source_height;

  std::optional<int> first_num;
  int last_num = 0;
  for (const auto& [tag, frame] : *seq) {
    if (tag != "frame") continue;
    const std::string where_frame = "frame #" + std::to_string(clip.frames.size() + 1);
    const int num = static_cast<int>(required_number(frame.get_child("<xmlattr>", {}), "num", where_frame));
    if (first_num && num <= last_num) {
      throw ParseError("frame numbers not increasing: " + std::to_string(num) + " after " + std::to_string(last_num));
    }
    if (!first_num) first_num = num;
    for (int gap = last_num + 1; gap < num && clip.frames.size() > 0; ++gap) {
      clip.frames.push_back({static_cast<int>(clip.frames.size()), {}});
    }
    last_num = num;

    SceneAnnotation scene;
    scene.frame_index = static_cast<int>(clip.frames.size());
    std::set<int> ids;
    if (auto targets = frame.get_child_optional("target_list")) {
      for (const auto& [ttag, target] : *targets) {
        if (ttag != "target") continue;
        const std::string where = "frame " + std::to_string(num) + " target";
        const int id = static_cast<int>(required_number(target.get_child("<xmlattr>", {}), "id", where));
        const std::string where_t = where + " " + std::to_string(id);
        auto box = target.get_child_optional("box.<xmlattr>");
        if (!box) throw ParseError(where_t + ": missing <box>");
        const double left = required_number(*box, "left", where_t);
        const double top = required_number(*box, "top", where_t);
        const double width = required_number(*box, "width", where_t);
        const double height = required_number(*box, "height", where_t);
        if (width < 0.0 || height < 0.0) throw ParseError(where_t + ": negative box size");
        auto type = target.get_optional<std::string>("attribute.<xmlattr>.vehicle_type");
        if (!type) throw ParseError(where_t + ": missing attribute 'vehicle_type'");
        if (!ids.insert(id).second) throw ParseError(where_t + ": duplicate target id");

        VehicleRecord rec;
        rec.track_id = id;
        rec.cls = vehicle_class_from_name(*type);
        rec.box = {clamp01(left / source_width), clamp01(top / source_height),
                   clamp01((left + width) / source_width), clamp01((top + height) / source_height)};
        scene.vehicles.push_back(rec);
      }
    }
    clip.frames.push_back(std::move(scene));
  }
  validate(clip);
  return clip;
}

FootageClip load_detrac_xml(const std::string& path, int source_width, int source_height) {
  return parse_detrac_xml(read_file(path), source_width, source_height);
}

std::string write_detrac_xml(const FootageClip& clip) {
  pt::ptree root;
  pt::ptree& seq = root.add("sequence", "");
  seq.put("<xmlattr>.name", clip.name);
  for (const auto& scene : clip.frames) {
    pt::ptree& frame = seq.add("frame", "");
    frame.put("<xmlattr>.density", scene.vehicles.size());
    frame.put("<xmlattr>.num", scene.frame_index + 1);
    pt::ptree& targets = frame.add("target_list", "");
    for (const auto& v : scene.vehicles) {
      pt::ptree& t = targets.add("target", "");
      t.put("<xmlattr>.id", v.track_id);
      const double w = clip.frame_width;
      const double h = clip.frame_height;
      t.put("box.<xmlattr>.left", format_number(v.box.b1 * w));
      t.put("box.<xmlattr>.top", format_number(v.box.b2 * h));
      t.put("box.<xmlattr>.width", format_number((v.box.b3 - v.box.b1) * w));
      t.put("box.<xmlattr>.height", format_number((v.box.b4 - v.box.b2) * h));
      t.put("attribute.<xmlattr>.vehicle_type", std::string(vehicle_class_name(v.cls)));
    }
  }
  std::ostringstream out;
  pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

std::string clip_to_json(const FootageClip& clip) {
  json frames = json::array();
  for (const auto& scene : clip.frames) {
    json recs = json::array();
    for (const auto& v : scene.vehicles) {
      recs.push_back({v.track_id, code(v.cls), v.box.b1, v.box.b2, v.box.b3, v.box.b4});
    }
    frames.push_back(std::move(recs));
  }
  json j = {{"name", clip.name},
            {"frame_width", clip.frame_width},
            {"frame_height", clip.frame_height},
            {"frames", std::move(frames)}};
  return j.dump() + "\n";
}

FootageClip clip_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed clip JSON: ") + e.what());
  }
  FootageClip clip;
  try {
    clip.name = j.value("name", std::string("clip"));
    clip.frame_width = j.value("frame_width", 960);
    clip.frame_height = j.value("frame_height", 540);
    for (const auto& recs : j.at("frames")) {
      SceneAnnotation scene;
      scene.frame_index = static_cast<int>(clip.frames.size());
      for (const auto& r : recs) {
        if (r.size() != 6) throw ParseError("clip record must have 6 fields");
        VehicleRecord v;
        v.track_id = r[0].get<int>();
        v.cls = vehicle_class_from_code(r[1].get<int>());
        v.box = {r[2].get<double>(), r[3].get<double>(), r[4].get<double>(), r[5].get<double>()};
        scene.vehicles.push_back(v);
      }
      clip.frames.push_back(std::move(scene));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid clip JSON: ") + e.what());
  }
  validate(clip);
  return clip;
}

FootageClip load_clip_json(const std::string& path) { return clip_from_json(read_file(path)); }

// --- synthetic traffic -------------------------------------------------------

void TrafficGenConfig::validate() const {
  if (lanes < 1) throw ValidationError("lanes must be >= 1");
  if (spawn_rate < 0.0) throw ValidationError("spawn_rate must be >= 0");
  if (!(speed_mean > 0.0)) throw ValidationError("speed_mean must be positive");
  if (speed_spread < 0.0 || speed_spread >= 1.0) throw ValidationError("speed_spread must be in [0, 1)");
  if (speed_jitter < 0.0 || speed_jitter >= speed_mean * (1.0 - speed_spread)) {
    throw ValidationError("speed_jitter must be non-negative and below the slowest vehicle speed");
  }
  double sum = 0.0;
  for (double p : class_mix) {
    if (p < 0.0) throw ValidationError("class_mix entries must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("class_mix must sum to 1");
}

namespace {

struct ClassGeometry {
  double width;
  double height;
};

constexpr std::array<ClassGeometry, kNumClasses> kGeometry{{
    {0.10, 0.09},  // car
    {0.20, 0.15},  // bus
    {0.12, 0.11},  // van
    {0.07, 0.07},  // others
}};

constexpr double kRoadTop = 0.1;
constexpr double kRoadBottom = 0.9;
constexpr double kMinGap = 0.02;

struct Vehicle {
  int id;
  VehicleClass cls;
  int lane;  // 0..lanes-1 move +x, lanes..2*lanes-1 move -x
  double x_left;
  double y_top;
  double speed;
};

class TrafficGenerator {
 public:
  explicit TrafficGenerator(std::uint64_t seed) : rng_(seed) {}

  SceneAnnotation step(const TrafficGenConfig& cfg, int frame_index, int* spawned, int* despawned) {
    const int total_lanes = 2 * cfg.lanes;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (auto& v : vehicles_) {
      const double jitter = cfg.speed_jitter > 0.0 ? cfg.speed_jitter * unit(rng_) : 0.0;
      v.x_left += direction(v.lane, cfg.lanes) * (v.speed + jitter);
    }
    const auto before = vehicles_.size();
    std::erase_if(vehicles_, [&](const Vehicle& v) {
      const double w = kGeometry[code(v.cls) - 1].width;
      return direction(v.lane, cfg.lanes) > 0 ? v.x_left >= 1.0 : v.x_left + w <= 0.0;
    });
    *despawned = static_cast<int>(before - vehicles_.size());

    *spawned = 0;
    std::poisson_distribution<int> arrivals(cfg.spawn_rate);
    const int n = cfg.spawn_rate > 0.0 ? arrivals(rng_) : 0;
    std::uniform_int_distribution<int> lane_pick(0, total_lanes - 1);
    std::discrete_distribution<int> class_pick(cfg.class_mix.begin(), cfg.class_mix.end());
    for (int k = 0; k < n; ++k) {
      const int lane = lane_pick(rng_);
      const auto cls = static_cast<VehicleClass>(class_pick(rng_) + 1);
      const auto geom = kGeometry[code(cls) - 1];
      const double speed = cfg.speed_mean * (1.0 + cfg.speed_spread * unit(rng_));
      const int dir = direction(lane, cfg.lanes);
      const double x_left = dir > 0 ? speed - geom.width : 1.0 - speed;
      if (!entry_clear(lane, dir, x_left, geom.width, cfg.lanes)) continue;
      const double lane_h = (kRoadBottom - kRoadTop) / total_lanes;
      const double slack = std::max(0.0, lane_h - geom.height);
      const double y_top = kRoadTop + lane * lane_h + 0.5 * slack + 0.25 * slack * unit(rng_);
      vehicles_.push_back({next_id_++, cls, lane, x_left, y_top, speed});
      ++*spawned;
    }

    SceneAnnotation scene;
    scene.frame_index = frame_index;
    for (const auto& v : vehicles_) {
      const auto geom = kGeometry[code(v.cls) - 1];
      BoundingBox box{clamp01(v.x_left), clamp01(v.y_top), clamp01(v.x_left + geom.width),
                      clamp01(v.y_top + geom.height)};
      scene.vehicles.push_back({v.id, v.cls, box});
    }
    return scene;
  }

 private:
  static int direction(int lane, int lanes) { return lane < lanes ? 1 : -1; }

  bool entry_clear(int lane, int dir, double x_left, double width, int /*lanes*/) const {
    for (const auto& v : vehicles_) {
      if (v.lane != lane) continue;
      const double vw = kGeometry[code(v.cls) - 1].width;
      if (dir > 0) {
        if (v.x_left < x_left + width + kMinGap) return false;
      } else {
        if (v.x_left + vw > x_left - kMinGap) return false;
      }
    }
    return true;
  }

  std::mt19937_64 rng_;
  std::vector<Vehicle> vehicles_;
  int next_id_ = 1;
};

}  // namespace

FootageClip generate_traffic(const TrafficGenConfig& config, int num_frames, std::string name) {
  return generate_traffic(config, num_frames, std::move(name), nullptr);
}

FootageClip generate_traffic(const TrafficGenConfig& config, int num_frames, std::string name,
                             TrafficLedger* ledger) {
  return generate_traffic_phases({{config, num_frames}}, std::move(name), ledger);
}

FootageClip generate_traffic_phases(const std::vector<std::pair<TrafficGenConfig, int>>& phases, std::string name) {
  return generate_traffic_phases(phases, std::move(name), nullptr);
}

FootageClip generate_traffic_phases(const std::vector<std::pair<TrafficGenConfig, int>>& phases, std::string name,
                                    TrafficLedger* ledger) {
  if (phases.empty()) throw ValidationError("at least one traffic phase is required");
  for (const auto& [cfg, frames] : phases) {
    cfg.validate();
    if (frames < 0) throw ValidationError("phase length must be non-negative");
    if (cfg.lanes != phases.front().first.lanes) throw ValidationError("lane count must be constant across phases");
  }
  FootageClip clip;
  clip.name = std::move(name);
  TrafficGenerator gen(phases.front().first.seed);
  for (const auto& [cfg, frames] : phases) {
    for (int i = 0; i < frames; ++i) {
      int spawned = 0;
      int despawned = 0;
      clip.frames.push_back(gen.step(cfg, static_cast<int>(clip.frames.size()), &spawned, &despawned));
      if (ledger) {
        ledger->spawns.push_back(spawned);
        ledger->despawns.push_back(despawned);
      }
    }
  }
  return clip;
}

}  // namespace semsim
