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

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "wheelsim/decoders.hpp"
#include "wheelsim/rng.hpp"

using namespace wheelsim;
using namespace wheelsim::decoders;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Horizontal channel at `h` mV and vertical at `v` mV, sampled at 100 Hz.
EogTrace steady(double h, double v, Millis duration) {
  EogTrace tr;
  for (Millis t = 0; t <= duration; t += 10) {
    tr.samples.push_back({t, h, EogChannel::Horizontal});
    tr.samples.push_back({t, v, EogChannel::Vertical});
  }
  return tr;
}

void add_blink(EogTrace& tr, Millis start, Millis width, double mv) {
  for (auto& s : tr.samples) {
    if (s.channel == EogChannel::Vertical && s.t >= start && s.t < start + width) {
      s.potential_mv += mv;
    }
  }
}

}  // namespace

TEST_SUITE("decoders") {
  TEST_CASE("adc_map endpoints and midpoint") {
    CHECK(adc_map(0.0) == 0);
    CHECK(adc_map(3.3) == 4095);
    // 1.65 / 3.3 * 4095 = 2047.5, rounded away from zero.
    CHECK(1.65 / 3.3 * 4095 == doctest::Approx(2047.5));
    CHECK(adc_map(1.65) == 2048);
    CHECK_THROWS_AS(adc_map(-0.01), Error);
    CHECK_THROWS_AS(adc_map(3.31), Error);
    CHECK_THROWS_AS(adc_map(std::nan("")), Error);
  }

  TEST_CASE("adc_map is monotone and hits every code") {
    std::vector<bool> seen(4096, false);
    int prev = -1;
    const int steps = 4096 * 8;
    for (int i = 0; i <= steps; ++i) {
      const double v = 3.3 * i / steps;
      const int c = adc_map(v);
      CHECK(c >= prev);
      prev = c;
      seen[static_cast<std::size_t>(c)] = true;
    }
    CHECK(std::count(seen.begin(), seen.end(), false) == 0);
  }

  TEST_CASE("joystick decoding") {
    auto rest = decode_joystick({2048, 2048, false});
    CHECK(rest.joy_speed == 0);
    CHECK(rest.direction == Direction::Stop);

    auto full = decode_joystick({2048, 4095, false});
    CHECK(full.joy_speed == 2047);
    CHECK(full.direction == Direction::Forward);
    CHECK(full.speed == 1.0);

    auto pressed = decode_joystick({2048, 3000, true});
    CHECK(pressed.direction == Direction::Stop);
    CHECK(pressed.joy_speed == 0);

    CHECK(decode_joystick({0, 2048, false}).direction == Direction::Left);
    CHECK(decode_joystick({0, 2048, false}).speed == 1.0);
    CHECK(decode_joystick({3000, 2048, false}).direction == Direction::Right);
    // Ties favour the y axis.
    CHECK(decode_joystick({2548, 1548, false}).direction == Direction::Backward);
  }

  TEST_CASE("joystick symmetry over the whole grid") {
    for (int cx = -2047; cx <= 2047; cx += 89) {
      for (int cy = -2047; cy <= 2047; cy += 97) {
        const auto a = decode_joystick({2048 + cx, 2048 + cy, false});
        const auto fy = decode_joystick({2048 + cx, 2048 - cy, false});
        const auto fx = decode_joystick({2048 - cx, 2048 + cy, false});
        CHECK(a.joy_speed == fy.joy_speed);
        if (a.direction == Direction::Forward) CHECK(fy.direction == Direction::Backward);
        if (a.direction == Direction::Backward) CHECK(fy.direction == Direction::Forward);
        if (a.direction == Direction::Left) CHECK(fx.direction == Direction::Right);
        if (a.direction == Direction::Right) CHECK(fx.direction == Direction::Left);
      }
    }
  }

  TEST_CASE("voice lexicon") {
    CHECK(parse_voice("forward") == Direction::Forward);
    CHECK(parse_voice("  STOP ") == Direction::Stop);
    CHECK(parse_voice("Backward\n") == Direction::Backward);
    CHECK_FALSE(parse_voice("hello").has_value());
    CHECK_FALSE(parse_voice("do not stop").has_value());
    CHECK_FALSE(parse_voice("").has_value());
  }

  TEST_CASE("random non-lexicon strings never parse") {
    Rng rng(4);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ";
    for (int i = 0; i < 5000; ++i) {
      std::string s;
      const auto len = rng.uniform_int(0, 10);
      for (int k = 0; k < len; ++k) {
        s += alphabet[static_cast<std::size_t>(rng.uniform_int(0, 26))];
      }
      std::string trimmed = s;
      trimmed.erase(0, trimmed.find_first_not_of(' '));
      trimmed.erase(trimmed.find_last_not_of(' ') + 1);
      const bool word = trimmed == "forward" || trimmed == "backward" || trimmed == "left" ||
                        trimmed == "right" || trimmed == "stop";
      CHECK(parse_voice(s).has_value() == word);
    }
  }

  TEST_CASE("bundled voice corpus") {
    std::ifstream in(oracle::fixture_dir() / "voice" / "corpus.tsv");
    REQUIRE(in);
    const auto cases = read_voice_corpus(in);
    CHECK(cases.size() >= 20);
    for (const auto& c : cases) {
      CAPTURE(c.utterance);
      CHECK(parse_voice(c.utterance) == c.expected);
    }
  }

  TEST_CASE("gesture tilt decoding") {
    CHECK_FALSE(decode_gesture({0, 0, 1}).has_value());
    CHECK(decode_gesture({-std::sin(25 * kDeg), 0, std::cos(25 * kDeg)}) == Direction::Forward);
    CHECK(decode_gesture({0, std::sin(25 * kDeg), std::cos(25 * kDeg)}) == Direction::Right);
    CHECK(decode_gesture({0, -std::sin(25 * kDeg), std::cos(25 * kDeg)}) == Direction::Left);
    CHECK(decode_gesture({std::sin(25 * kDeg), 0, std::cos(25 * kDeg)}) == Direction::Backward);
    // Pitch wins when both exceed.
    CHECK(decode_gesture({-0.5, 0.5, 0.7}) == Direction::Forward);
    const auto tilt = tilt_of({-std::sin(25 * kDeg), 0, std::cos(25 * kDeg)});
    CHECK(tilt.pitch_deg == doctest::Approx(25.0));
  }

  TEST_CASE("gesture properties") {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
      const double pitch = rng.uniform(-60, 60) * kDeg;
      const double roll = rng.uniform(-60, 60) * kDeg;
      // Sample consistent with the atan2 convention.
      const AccelSample s{-std::sin(pitch), std::cos(pitch) * std::sin(roll),
                          std::cos(pitch) * std::cos(roll)};
      const auto t = tilt_of(s);
      if (std::abs(t.pitch_deg) <= 20 && std::abs(t.roll_deg) <= 20) {
        CHECK_FALSE(decode_gesture(s).has_value());
      }
      if (decode_gesture(s) == Direction::Forward) {
        const AccelSample rotated{-s.ax, -s.ay, s.az};
        CHECK(decode_gesture(rotated) == Direction::Backward);
      }
    }
  }

  TEST_CASE("flat EOG trace gives no command") {
    const auto r = decode_eog(steady(0, 0, 3000), 3000);
    CHECK(r.angle_deg == 0.0);
    CHECK_FALSE(r.command.has_value());
  }

  TEST_CASE("steady 0.26 mV for 4.2 s emits forward once") {
    const auto r = decode_eog(steady(0, 0.26, 4200), 4200);
    CHECK(r.angle_deg == doctest::Approx(13.0));
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].direction == Direction::Forward);
    CHECK(r.events[0].t >= 4000);
    CHECK(r.command == Direction::Forward);
  }

  TEST_CASE("horizontal deflection maps to left and right") {
    CHECK(decode_eog(steady(0.3, 0, 4500), 4500).command == Direction::Right);
    CHECK(decode_eog(steady(-0.3, 0, 4500), 4500).command == Direction::Left);
    CHECK(decode_eog(steady(0, -0.3, 4500), 4500).command == Direction::Backward);
  }

  TEST_CASE("no direction before four seconds of dwell") {
    for (Millis stop_at : {500, 2000, 3900, 3990}) {
      const auto r = decode_eog(steady(0.3, 0, 6000), stop_at);
      CHECK(r.events.empty());
    }
    // A break in the deflection restarts the dwell.
    auto tr = steady(0.3, 0, 8000);
    for (auto& s : tr.samples) {
      if (s.channel == EogChannel::Horizontal && s.t >= 3000 && s.t < 3200) s.potential_mv = 0;
    }
    const auto r = decode_eog(tr, 7000);
    CHECK(r.events.empty());
    CHECK(decode_eog(tr, 7300).events.size() == 1);
  }

  TEST_CASE("double blink emits stop") {
    auto tr = steady(0, 0, 3000);
    add_blink(tr, 1000, 150, 0.5);
    add_blink(tr, 1600, 150, 0.5);
    const auto r = decode_eog(tr, 3000);
    CHECK(r.blinks.size() == 2);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].direction == Direction::Stop);
  }

  TEST_CASE("blink pairs beyond one second never stop") {
    for (Millis gap : {1100, 1500, 2500}) {
      auto tr = steady(0, 0, 6000);
      add_blink(tr, 1000, 150, 0.5);
      add_blink(tr, 1000 + gap, 150, 0.5);
      const auto r = decode_eog(tr, 6000);
      CHECK(r.blinks.size() == 2);
      CHECK(r.events.empty());
    }
  }

  TEST_CASE("blinks outside the width band or amplitude are ignored") {
    auto tr = steady(0, 0, 4000);
    add_blink(tr, 500, 30, 0.5);    // too short
    add_blink(tr, 900, 600, 0.5);   // too long
    add_blink(tr, 2000, 150, 0.2);  // too weak
    add_blink(tr, 2500, 150, 0.2);
    const auto r = decode_eog(tr, 4000);
    CHECK(r.blinks.empty());
    CHECK(r.events.empty());
  }

  TEST_CASE("EOG needs 200 ms of horizontal history") {
    CHECK_THROWS_AS(decode_eog(steady(0, 0, 150), 150), Error);
    try {
      decode_eog(steady(0, 0, 100), 100);
    } catch (const Error& e) {
      CHECK(e.code() == "InsufficientHistory");
    }
    CHECK_NOTHROW(decode_eog(steady(0, 0, 200), 200));
  }

  TEST_CASE("trace csv readers") {
    std::stringstream eog("t_ms,channel,value\n0,horizontal,0.1\n10,v,0.2\n");
    const auto tr = read_eog_csv(eog);
    REQUIRE(tr.samples.size() == 2);
    CHECK(tr.samples[1].channel == EogChannel::Vertical);

    std::stringstream bad("t_ms,channel,value\n0,diagonal,0.1\n");
    CHECK_THROWS_AS(read_eog_csv(bad), Error);

    std::stringstream acc("t_ms,channel,value\n0,ax,0.1\n0,ay,0.2\n0,az,0.9\n10,az,1.0\n");
    const auto samples = read_accel_csv(acc);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].ay == 0.2);
    CHECK(samples[1].az == 1.0);
  }
}
