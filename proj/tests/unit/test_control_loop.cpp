// Copyright 2026 The wheelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sstream>

#include "wheelsim/control_loop.hpp"
#include "wheelsim/json.hpp"

using namespace wheelsim;
using namespace wheelsim::arbitration;

namespace {

std::vector<TickOutput> run_all(InputSource& src, LoopOptions opts = {}) {
  ControlLoop loop(opts);
  std::vector<TickOutput> out;
  loop.run(src, [&](const TickOutput& t) { out.push_back(t); });
  return out;
}

ControlInputs forward_stick() {
  ControlInputs in;
  in.joy_speed = 1500;
  return in;
}

}  // namespace

TEST_SUITE("control_loop") {
  TEST_CASE("one simulated second is fifty emissions") {
    VectorSource src(std::vector<std::optional<ControlInputs>>(1000, ControlInputs{}));
    LoopOptions o;
    o.duration_ms = 1000;
    const auto out = run_all(src, o);
    REQUIRE(out.size() == 50);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].t_ms == static_cast<Millis>(20 * i));
  }

  TEST_CASE("N seconds give 50 N ticks with exact simulated period") {
    for (int n : {1, 3, 7, 60}) {
      VectorSource src(std::vector<std::optional<ControlInputs>>(50 * n + 25, ControlInputs{}));
      LoopOptions o;
      o.duration_ms = 1000 * n;
      ControlLoop loop(o);
      const auto stats = loop.run(src, nullptr);
      CHECK(stats.ticks == static_cast<std::size_t>(50 * n));
      CHECK(stats.mean_ms == 20.0);
      CHECK(stats.stddev_ms == 0.0);
    }
  }

  TEST_CASE("idle input emits only stop") {
    VectorSource src(std::vector<std::optional<ControlInputs>>(200, ControlInputs{}));
    for (const auto& t : run_all(src)) {
      CHECK(t.mode == ModeId::Stop);
      CHECK(t.command.direction == Direction::Stop);
    }
  }

  TEST_CASE("scripted fall at 400 ms latches from tick 20 onward") {
    std::vector<std::optional<ControlInputs>> snaps;
    for (int i = 0; i < 100; ++i) {
      auto in = forward_stick();
      in.fall_flag = i == 20;  // one-tick pulse at t = 400 ms
      snaps.push_back(in);
    }
    VectorSource src(std::move(snaps));
    const auto out = run_all(src);
    REQUIRE(out.size() == 100);
    CHECK(out[19].mode == ModeId::Joystick);
    for (std::size_t i = 20; i < out.size(); ++i) {
      CAPTURE(i);
      CHECK(out[i].mode == ModeId::Stop);
    }
  }

  TEST_CASE("one missing snapshot repeats the previous, two degrade to stop") {
    std::vector<std::optional<ControlInputs>> snaps(20, forward_stick());
    snaps[15] = std::nullopt;
    snaps.push_back(std::nullopt);
    snaps.push_back(std::nullopt);
    snaps.push_back(std::nullopt);
    VectorSource src(std::move(snaps));
    const auto out = run_all(src);
    REQUIRE(out.size() == 23);
    CHECK(out[14].mode == ModeId::Joystick);
    CHECK(out[15].mode == ModeId::Joystick);
    CHECK(out[20].mode == ModeId::Joystick);
    CHECK(out[21].mode == ModeId::Stop);
    CHECK(out[22].mode == ModeId::Stop);
  }

  TEST_CASE("stick must dwell again after data loss") {
    std::vector<std::optional<ControlInputs>> snaps(20, forward_stick());
    snaps.push_back(std::nullopt);
    snaps.push_back(std::nullopt);
    for (int i = 0; i < 20; ++i) snaps.push_back(forward_stick());
    VectorSource src(std::move(snaps));
    const auto out = run_all(src);
    // Resumes at index 22 (t = 440 ms); eligible from 440 + 260.
    CHECK(out[22].mode == ModeId::Stop);
    CHECK(out[34].mode == ModeId::Stop);
    CHECK(out[35].mode == ModeId::Joystick);
  }

  TEST_CASE("jsonl trace replay with null lines") {
    std::stringstream trace;
    trace << R"({"joy_speed":1500})" << "\n"
          << "null\n"
          << "\n"
          << R"({"voice_ready":true,"voice_command":"left"})" << "\n";
    JsonlTraceSource src(trace);
    const auto out = run_all(src);
    REQUIRE(out.size() == 3);
    CHECK(out[2].mode == ModeId::Voice);
    CHECK(out[2].command.direction == Direction::Left);
    const json line = out[2];
    CHECK(line["t_ms"] == 40);
    CHECK(line["mode"] == "Voice");
    CHECK(line["direction"] == "Left");
    CHECK(line.contains("speed"));
  }

  TEST_CASE("malformed trace line is reported with its number") {
    std::stringstream trace;
    trace << "{}\n{oops\n";
    JsonlTraceSource src(trace);
    ControlLoop loop;
    try {
      loop.run(src, nullptr);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == "ParseError");
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  TEST_CASE("realtime pacing keeps the tick count and roughly the period") {
    VectorSource src(std::vector<std::optional<ControlInputs>>(1000, ControlInputs{}));
    LoopOptions o;
    o.realtime = true;
    o.duration_ms = 400;
    ControlLoop loop(o);
    const auto stats = loop.run(src, nullptr);
    CHECK(stats.ticks == 20);
    CHECK(stats.mean_ms == doctest::Approx(20.0).epsilon(0.1));
  }

  TEST_CASE("period meter statistics") {
    PeriodMeter m;
    for (double v : {19.0, 21.0, 20.0, 20.0}) m.add(v);
    const auto s = m.stats();
    CHECK(s.mean_ms == doctest::Approx(20.0));
    CHECK(s.stddev_ms == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.max_ms == 21.0);
  }
}
