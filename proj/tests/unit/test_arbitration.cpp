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

#include "sweeps.hpp"
#include "wheelsim/arbitration.hpp"

using namespace wheelsim;
using namespace wheelsim::arbitration;

namespace {

ArbitrationState debounced_state(Millis now) {
  ArbitrationState s;
  s.joystick_debounce.first_seen_ms = now - 300;
  s.last_tick_ms = now - kTickMs;
  return s;
}

ControlInputs at(Millis t) {
  ControlInputs in;
  in.timestamp = t;
  return in;
}

}  // namespace

TEST_SUITE("arbitration") {
  TEST_CASE("hazard forces stop and latches") {
    auto in = at(1000);
    in.fall_flag = true;
    in.joy_speed = 500;
    const auto r = arbitrate(in, debounced_state(1000));
    CHECK(r.mode == ModeId::Stop);
    CHECK(r.command == MotionCommand::stop());
    CHECK(r.state.safe_halt);
  }

  TEST_CASE("latched state with idle inputs stays stopped") {
    ArbitrationState s;
    s.safe_halt = true;
    const auto r = arbitrate(at(20), s);
    CHECK(r.mode == ModeId::Stop);
    CHECK(r.state.safe_halt);
  }

  TEST_CASE("debounced joystick outranks voice") {
    auto in = at(1000);
    in.joy_speed = 60;
    in.voice_ready = true;
    in.voice_command = Direction::Left;
    const auto r = arbitrate(in, debounced_state(1000));
    CHECK(r.mode == ModeId::Joystick);
    CHECK(r.command.direction == Direction::Forward);
    CHECK(r.command.speed == doctest::Approx(60.0 / 2047.0));
  }

  TEST_CASE("empty input yields stop") {
    const auto r = arbitrate(at(0), {});
    CHECK(r.mode == ModeId::Stop);
    CHECK(r.command.speed == 0.0);
  }

  TEST_CASE("eog above threshold wins when higher rungs are idle") {
    auto in = at(40);
    in.eog_angle = 13.0;
    in.eog_command = Direction::Forward;
    const auto r = arbitrate(in, {});
    CHECK(r.mode == ModeId::EOG);
    CHECK(r.command.direction == Direction::Forward);
    CHECK(r.command.speed == doctest::Approx(0.5));
  }

  TEST_CASE("threshold boundaries are strict") {
    auto in = at(1000);
    in.joy_speed = 50;
    CHECK(arbitrate(in, debounced_state(1000)).mode == ModeId::Stop);
    in.joy_speed = -50;
    CHECK(arbitrate(in, debounced_state(1000)).mode == ModeId::Stop);
    in.joy_speed = -51;
    const auto r = arbitrate(in, debounced_state(1000));
    CHECK(r.mode == ModeId::Joystick);
    CHECK(r.command.direction == Direction::Backward);
    in.joy_speed = 0;
    in.eog_angle = 12.0;
    CHECK(arbitrate(in, {}).mode == ModeId::Stop);
  }

  TEST_CASE("debounce needs 250 ms of continuous deflection") {
    ArbitrationState s;
    bool ok = false;
    // First seen at t = 0; 240 ms later is 12 ticks on.
    for (Millis t = 0; t <= 240; t += kTickMs) {
      auto r = debounce_ok(s, true, t);
      s = r.state;
      ok = r.ok;
    }
    CHECK_FALSE(ok);
    auto r260 = debounce_ok(debounce_ok(s, true, 250).state, true, 260);
    CHECK(r260.ok);

    auto reset = debounce_ok(r260.state, false, 280);
    CHECK_FALSE(reset.ok);
    CHECK_FALSE(reset.state.joystick_debounce.first_seen_ms.has_value());
    CHECK_FALSE(debounce_ok(reset.state, true, 300).ok);
  }

  TEST_CASE("joystick is ignored until the dwell elapses") {
    ArbitrationState s;
    std::vector<ModeId> modes;
    for (Millis t = 0; t <= 300; t += kTickMs) {
      auto in = at(t);
      in.joy_speed = 900;
      in.voice_ready = true;
      in.voice_command = Direction::Right;
      auto r = arbitrate(in, s);
      s = r.state;
      modes.push_back(r.mode);
    }
    // Ticks at 0..240 ms are voice; 260 ms onward joystick.
    for (std::size_t i = 0; i < modes.size(); ++i) {
      CAPTURE(i);
      CHECK(modes[i] == (i * kTickMs >= 260 ? ModeId::Joystick : ModeId::Voice));
    }
  }

  TEST_CASE("clear_safe_halt contract") {
    ArbitrationState latched;
    latched.safe_halt = true;
    CHECK_FALSE(clear_safe_halt(latched, {}).safe_halt);
    CHECK_THROWS_WITH_AS(clear_safe_halt(latched, {.fall = true}), doctest::Contains("hazard"),
                         Error);
    try {
      clear_safe_halt(latched, {.obstacle = true});
      FAIL("expected refusal");
    } catch (const Error& e) {
      CHECK(e.code() == "HazardStillActive");
    }
    const ArbitrationState open;
    CHECK(clear_safe_halt(open, {.health = true}) == open);
  }

  TEST_CASE("manual policy restricts eligibility") {
    auto s = select_mode(debounced_state(1000), ManualExclusive{ModeId::Voice});
    auto in = at(1000);
    in.joy_speed = 900;
    CHECK(arbitrate(in, s).mode == ModeId::Stop);
    in.voice_ready = true;
    in.voice_command = Direction::Backward;
    CHECK(arbitrate(in, s).mode == ModeId::Voice);

    s = select_mode(s, AutoLadder{});
    CHECK(arbitrate(in, s).mode == ModeId::Joystick);

    ArbitrationState latched;
    latched.safe_halt = true;
    latched = select_mode(latched, ManualExclusive{ModeId::Gesture});
    auto g = at(20);
    g.gesture_ok = true;
    g.gesture_command = Direction::Left;
    const auto r = arbitrate(g, latched);
    CHECK(r.mode == ModeId::Stop);
    CHECK(r.state.safe_halt);
  }

  TEST_CASE("a winning rung without a command keeps its mode and stops") {
    auto in = at(20);
    in.voice_ready = true;
    const auto r = arbitrate(in, {});
    CHECK(r.mode == ModeId::Voice);
    CHECK(r.command.direction == Direction::Stop);
    CHECK(r.command.speed == 0.0);
  }

  TEST_CASE("stationary button stops without latching") {
    auto in = at(1000);
    in.joy_pressed = true;
    in.joy_speed = 900;
    in.voice_ready = true;
    in.voice_command = Direction::Left;
    const auto r = arbitrate(in, debounced_state(1000));
    CHECK(r.mode == ModeId::Stop);
    CHECK_FALSE(r.state.safe_halt);
  }

  TEST_CASE("truth table matches the reference ladder") {
    const auto r = oracle::ladder_sweep();
    CHECK(r.cases >= 1344);
    CHECK(r.mismatches == 0);
    for (const auto& f : r.first_failures) MESSAGE(f);
  }

  TEST_CASE("determinism: equal inputs and state give equal outputs") {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
      auto in = at(rng.uniform_int(0, 100000));
      in.joy_speed = static_cast<int>(rng.uniform_int(-2048, 2047));
      in.voice_ready = rng.bernoulli(0.5);
      in.voice_command = Direction::Forward;
      in.eog_angle = rng.uniform(0, 30);
      in.obstacle_flag = rng.bernoulli(0.1);
      ArbitrationState s;
      s.joystick_debounce.first_seen_ms = in.timestamp - rng.uniform_int(0, 500);
      const auto a = arbitrate(in, s);
      const auto b = arbitrate(in, s);
      CHECK(a.mode == b.mode);
      CHECK(a.command == b.command);
      CHECK(a.state == b.state);
    }
  }

  TEST_CASE("latch never drops inside arbitrate") {
    const auto r = oracle::latch_fuzz(500, 200, 7);
    CHECK(r.hazard_onsets > 100);
    CHECK(r.clears > 50);
    CHECK(r.refused_clears > 0);
    CHECK(r.violations == 0);
  }

  TEST_CASE("policy names round trip") {
    CHECK(policy_name(*parse_policy("auto")) == "AutoLadder");
    CHECK(policy_name(*parse_policy("voice")) == "Voice");
    CHECK_FALSE(parse_policy("stop").has_value());
    CHECK_FALSE(parse_policy("warp").has_value());
  }
}
