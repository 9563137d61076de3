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

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "semsim/error.hpp"
#include "semsim/layout.hpp"
#include "test_support.hpp"

using namespace semsim;
using namespace semsim::test;

namespace {

SceneAnnotation single(int id, VehicleClass cls, BoundingBox box) {
  SceneAnnotation s;
  s.vehicles.push_back({id, cls, box});
  return s;
}

}  // namespace

TEST_SUITE("layout") {
  TEST_CASE("quantization maps to cell centers") {
    CHECK(quantize_coordinate(0.0) == 0);
    CHECK(quantize_coordinate(1.0) == 31);
    CHECK(quantize_coordinate(0.5) == 16);
    CHECK(quantize_coordinate(0.031249) == 0);
    CHECK(dequantize_coordinate(0) == 1.0 / 64);
    CHECK(dequantize_coordinate(31) == 63.0 / 64);
  }

  TEST_CASE("single record wire format") {
    const auto msg = encode_message(single(9, VehicleClass::kCar, {0, 0, 1, 1}));
    CHECK(msg.size_bits == 22);
    CHECK(msg.vehicle_count == 1);
    REQUIRE(msg.payload.size() == 3);
    CHECK(msg.payload[0] == 0x00);
    CHECK(msg.payload[1] == 0x0F);
    CHECK(msg.payload[2] == 0xFC);

    const auto bus = encode_message(single(1, VehicleClass::kOthers, {0, 0, 0, 0}));
    CHECK(bus.payload[0] == 0xC0);
  }

  TEST_CASE("packet size is 22 bits per vehicle") {
    std::mt19937_64 rng(3);
    for (int m : {0, 1, 8, 64}) {
      SceneAnnotation s;
      for (int i = 0; i < m; ++i) s.vehicles.push_back({i, VehicleClass::kVan, test::lattice_box(rng, 32)});
      const auto msg = encode_message(s);
      CHECK(msg.size_bits == std::size_t(22 * m));
      CHECK(msg.payload.size() == std::size_t((22 * m + 7) / 8));
    }
  }

  TEST_CASE("more than 64 vehicles is rejected") {
    SceneAnnotation s;
    for (int i = 0; i < 65; ++i) s.vehicles.push_back({i, VehicleClass::kCar, {0, 0, 0.1, 0.1}});
    CHECK_THROWS_AS(encode_message(s), ValidationError);
  }

  TEST_CASE("invalid boxes are rejected") {
    CHECK_THROWS_AS(encode_message(single(1, VehicleClass::kCar, {0.5, 0, 0.4, 1})), ValidationError);
    CHECK_THROWS_AS(encode_message(single(1, VehicleClass::kCar, {0, 0, 1.2, 1})), ValidationError);
    CHECK_THROWS_AS(vehicle_class_from_code(5), ValidationError);
  }

  TEST_CASE("byte payloads: record count inferred, padding checked") {
    const auto msg = encode_message(single(1, VehicleClass::kBus, {0.1, 0.2, 0.3, 0.4}));
    const auto back = message_from_bytes(msg.payload);
    CHECK(back == msg);
    std::vector<std::uint8_t> bad = msg.payload;
    bad.back() |= 0x01;
    CHECK_THROWS_AS(message_from_bytes(bad), DecodeError);
    const std::vector<std::uint8_t> two(2, 0);
    CHECK_THROWS_AS(message_from_bytes(two), DecodeError);
    CHECK(message_from_bytes({}).vehicle_count == 0);
  }

  TEST_CASE("decode rejects inverted records and inconsistent lengths") {
    SemanticMessage m;
    m.payload = {0x00, 0x0F, 0xFC};
    m.vehicle_count = 1;
    m.size_bits = 22;
    CHECK_NOTHROW(decode_message(m));
    SemanticMessage inverted = m;
    inverted.payload = {0x3E, 0x00, 0x00};  // q1 = 31 > q3 = 0
    CHECK_THROWS_AS(decode_message(inverted), DecodeError);
    SemanticMessage wrong = m;
    wrong.size_bits = 21;
    CHECK_THROWS_AS(decode_message(wrong), DecodeError);
  }

  TEST_CASE("codec round trip is bit exact on random messages") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> count(0, 64), q(0, 31), cls(0, 3);
    for (int trial = 0; trial < 10000; ++trial) {
      const int m = count(rng);
      std::vector<std::uint8_t> bytes((22 * m + 7) / 8, 0);
      std::size_t pos = 0;
      auto put = [&](int v, int bits) {
        for (int i = bits - 1; i >= 0; --i, ++pos) {
          if ((v >> i) & 1) bytes[pos / 8] |= std::uint8_t(0x80 >> (pos % 8));
        }
      };
      for (int i = 0; i < m; ++i) {
        int a = q(rng), b = q(rng), c = q(rng), d = q(rng);
        put(cls(rng), 2);
        put(std::min(a, c), 5);
        put(std::min(b, d), 5);
        put(std::max(a, c), 5);
        put(std::max(b, d), 5);
      }
      const auto msg = message_from_bytes(bytes);
      REQUIRE(msg.vehicle_count == std::size_t(m));
      const auto again = encode_message(decode_message(msg));
      REQUIRE(again == msg);
    }
  }

  TEST_CASE("coordinate error is bounded by the lattice") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double total = 0.0, worst = 0.0;
    int n = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      const BoundingBox box{x0, y0, x1, y1};
      const auto out = decode_message(encode_message(single(1, VehicleClass::kCar, box))).vehicles.at(0).box;
      for (auto [a, b] : {std::pair{box.b1, out.b1}, {box.b2, out.b2}, {box.b3, out.b3}, {box.b4, out.b4}}) {
        const double e = std::abs(a - b);
        worst = std::max(worst, e);
        total += e;
        ++n;
      }
    }
    CHECK(worst <= 1.0 / 32);
    CHECK(total / n <= 1.0 / 64);
  }

  TEST_CASE("rasterization") {
    const auto grid = rasterize(single(1, VehicleClass::kBus, {0, 0, 0.5, 0.5}));
    CHECK(grid.width() == 120);
    CHECK(grid.height() == 80);
    CHECK(std::count(grid.cells().begin(), grid.cells().end(), 2) == 60 * 40);
    CHECK(grid.at(59, 39) == 2);
    CHECK(grid.at(60, 39) == 0);

    SceneAnnotation overlap;
    overlap.vehicles.push_back({1, VehicleClass::kCar, {0, 0, 1, 1}});
    overlap.vehicles.push_back({2, VehicleClass::kVan, {0.5, 0.5, 1, 1}});
    const auto g = rasterize(overlap, 10, 10);
    CHECK(g.at(0, 0) == 1);
    CHECK(g.at(9, 9) == 3);

    const auto point = rasterize(single(1, VehicleClass::kOthers, {1, 1, 1, 1}), 10, 10);
    CHECK(std::count(point.cells().begin(), point.cells().end(), 4) == 1);
    CHECK(point.at(9, 9) == 4);
    CHECK_THROWS_AS(VisualLayout(0, 3), ValidationError);
  }

  TEST_CASE("semantic change worked examples") {
    const BoundingBox a{0, 0, 0.5, 0.5};
    CHECK(semantic_change(single(1, VehicleClass::kCar, a), single(1, VehicleClass::kCar, a)) == 0.0);
    // Disjoint: exactly 1/2.
    CHECK(semantic_change(single(1, VehicleClass::kCar, a), single(1, VehicleClass::kCar, {0.5, 0.5, 1, 1})) == 0.5);
    // Half overlap: A = A' = 1/4, I = 1/8, (1/2 - 1/4) / (2 * 3/8) = 1/3.
    CHECK(semantic_change(single(1, VehicleClass::kCar, a), single(1, VehicleClass::kCar, {0.25, 0, 0.75, 0.5})) ==
          doctest::Approx(1.0 / 3).epsilon(1e-15));
    // Unmatched ids contribute 1/2 each.
    CHECK(semantic_change(single(1, VehicleClass::kCar, a), single(2, VehicleClass::kCar, a)) == 1.0);
    CHECK(semantic_change(single(1, VehicleClass::kCar, a), SceneAnnotation{}) == 0.5);
    CHECK(semantic_change(SceneAnnotation{}, SceneAnnotation{}) == 0.0);
  }

  TEST_CASE("prediction deviation worked examples") {
    const auto real = rasterize(single(1, VehicleClass::kCar, {0, 0, 0.5, 0.5}));
    CHECK(prediction_deviation(real, real) == 0.0);
    const auto moved = rasterize(single(1, VehicleClass::kCar, {0.5, 0.5, 1, 1}));
    CHECK(prediction_deviation(real, moved) == 0.5);
    const auto other_class = rasterize(single(1, VehicleClass::kBus, {0, 0, 0.5, 0.5}));
    CHECK(prediction_deviation(real, other_class) == 1.0);
    const VisualLayout empty(120, 80);
    CHECK(prediction_deviation(empty, empty) == 0.0);
    CHECK(prediction_deviation(real, empty) == 0.5);
    CHECK_THROWS_AS(prediction_deviation(real, VisualLayout(10, 10)), ValidationError);
  }

  TEST_CASE("penalized deviation") {
    CHECK(penalized_deviation(0.0) == 0.0);
    CHECK(penalized_deviation(0.05) == 0.05);
    CHECK(penalized_deviation(0.07) == 0.07);
    CHECK(penalized_deviation(0.08) == doctest::Approx(0.58));
    CHECK(penalized_deviation(0.6) == 1.0);
    CHECK(penalized_deviation(1.4) == 1.0);
    CHECK_THROWS_AS(penalized_deviation(-0.1), DomainError);
  }

  TEST_CASE("metrics match integer oracles on random small scenes") {
    std::mt19937_64 rng(777);
    constexpr int kDenom = 16, kW = 24, kH = 12;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto a = test::random_scene(rng, 6, kDenom, 8);
      const auto b = test::random_scene(rng, 6, kDenom, 8);
      REQUIRE(semantic_change(a, b) == oracle_chi(a, b, kDenom));

      const auto ra = rasterize(a, kW, kH);
      const auto rb = rasterize(b, kW, kH);
      const auto oa = oracle_raster(a, kW, kH, kDenom);
      const auto ob = oracle_raster(b, kW, kH, kDenom);
      REQUIRE(std::equal(ra.cells().begin(), ra.cells().end(), oa.begin()));
      REQUIRE(prediction_deviation(ra, rb) == oracle_deviation(oa, ob));
    }
  }

  TEST_CASE("metric properties") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
      const auto a = test::random_scene(rng, 8, 32, 12);
      const auto b = test::random_scene(rng, 8, 32, 12);
      CHECK(semantic_change(a, a) == 0.0);
      CHECK(semantic_change(a, b) == semantic_change(b, a));

      std::set<int> ids;
      for (const auto& v : a.vehicles) ids.insert(v.track_id);
      for (const auto& v : b.vehicles) ids.insert(v.track_id);
      const double chi = semantic_change(a, b);
      CHECK(chi >= 0.0);
      CHECK(chi <= 0.5 * double(ids.size()));

      for (const auto& va : a.vehicles) {
        for (const auto& vb : b.vehicles) {
          const double term = box_change_term(va.box, vb.box);
          CHECK(term >= 0.0);
          CHECK(term <= 0.5);
        }
      }

      auto shuffled = a;
      std::shuffle(shuffled.vehicles.begin(), shuffled.vehicles.end(), rng);
      CHECK(semantic_change(shuffled, b) == semantic_change(a, b));

      const auto ra = rasterize(a);
      const auto rb = rasterize(b);
      const double d = prediction_deviation(ra, rb);
      CHECK(prediction_deviation(ra, ra) == 0.0);
      CHECK(d == prediction_deviation(rb, ra));
      CHECK(d >= 0.0);
      CHECK(d <= 2.0);
      const double p = penalized_deviation(d);
      CHECK(p >= std::min(d, 1.0));
      CHECK(p <= 1.0);
    }
  }

  TEST_CASE("quantize_scene matches a decode round trip") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      auto s = test::random_scene(rng, 10, 100, 20);
      const auto q = quantize_scene(s);
      const auto d = decode_message(encode_message(s));
      REQUIRE(q.vehicles.size() == d.vehicles.size());
      for (std::size_t i = 0; i < q.vehicles.size(); ++i) {
        CHECK(q.vehicles[i].box == d.vehicles[i].box);
        CHECK(q.vehicles[i].track_id == s.vehicles[i].track_id);
      }
    }
  }
}
