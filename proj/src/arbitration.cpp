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

#include "wheelsim/arbitration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace wheelsim::arbitration {
namespace {

constexpr std::array<ModeId, 4> kLadder = {ModeId::Joystick, ModeId::Voice, ModeId::Gesture,
                                           ModeId::EOG};

struct Eligibility {
  bool joystick = false;
  bool voice = false;
  bool gesture = false;
  bool eog = false;

  bool operator[](ModeId mode) const {
    switch (mode) {
      case ModeId::Joystick: return joystick;
      case ModeId::Voice: return voice;
      case ModeId::Gesture: return gesture;
      case ModeId::EOG: return eog;
      case ModeId::Stop: return false;
    }
    return false;
  }
};

MotionCommand discrete_command(ModeId source, const std::optional<Direction>& dir, double speed) {
  if (!dir || *dir == Direction::Stop) return MotionCommand::stop(source);
  return {*dir, std::clamp(speed, 0.0, 1.0), source};
}

MotionCommand joystick_command(const ControlInputs& in) {
  const int magnitude = std::abs(in.joy_speed);
  Direction dir = in.joy_command.value_or(in.joy_speed >= 0 ? Direction::Forward
                                                            : Direction::Backward);
  if (dir == Direction::Stop || magnitude == 0) return MotionCommand::stop(ModeId::Joystick);
  return {dir, std::min(1.0, magnitude / 2047.0), ModeId::Joystick};
}

MotionCommand command_for(ModeId mode, const ControlInputs& in, const ArbitrationConfig& cfg) {
  switch (mode) {
    case ModeId::Joystick: return joystick_command(in);
    case ModeId::Voice: return discrete_command(mode, in.voice_command, cfg.discrete_speed);
    case ModeId::Gesture: return discrete_command(mode, in.gesture_command, cfg.discrete_speed);
    case ModeId::EOG: return discrete_command(mode, in.eog_command, cfg.discrete_speed);
    case ModeId::Stop: break;
  }
  return MotionCommand::stop();
}

ArbitrationResult stop_result(ArbitrationState state) {
  return {ModeId::Stop, MotionCommand::stop(), std::move(state)};
}

}  // namespace

DebounceResult debounce_ok(ArbitrationState state, bool above_threshold, Millis now) {
  auto& first_seen = state.joystick_debounce.first_seen_ms;
  if (!above_threshold) {
    first_seen.reset();
    return {false, std::move(state)};
  }
  if (!first_seen) first_seen = now;
  const bool ok = now - *first_seen >= kJoystickDebounceMs;
  return {ok, std::move(state)};
}

ArbitrationResult arbitrate(const ControlInputs& inputs, ArbitrationState state,
                            const ArbitrationConfig& config) {
  const Millis now = std::max(inputs.timestamp, state.last_tick_ms);
  const bool joy_above = !inputs.joy_pressed && std::abs(inputs.joy_speed) > kJoystickThreshold;

  // The debounce timer advances on every tick, latched or not, so a held
  // stick is not mistaken for a fresh deflection after a clear.
  auto [debounced, next] = debounce_ok(std::move(state), joy_above, now);
  next.last_tick_ms = now;

  if (inputs.any_hazard()) {
    next.safe_halt = true;
    return stop_result(std::move(next));
  }
  if (next.safe_halt) return stop_result(std::move(next));
  // Stationary-mode button: immediate stop, not a hazard.
  if (inputs.joy_pressed) return stop_result(std::move(next));

  const Eligibility eligible{
      .joystick = joy_above && debounced,
      .voice = inputs.voice_ready,
      .gesture = inputs.gesture_ok,
      .eog = inputs.eog_angle > kEogThresholdDeg,
  };

  ModeId winner = ModeId::Stop;
  if (const auto* manual = std::get_if<ManualExclusive>(&next.selected_policy)) {
    if (eligible[manual->mode]) winner = manual->mode;
  } else {
    for (ModeId rung : kLadder) {
      if (eligible[rung]) {
        winner = rung;
        break;
      }
    }
  }

  if (winner == ModeId::Stop) return stop_result(std::move(next));
  return {winner, command_for(winner, inputs, config), std::move(next)};
}

ArbitrationState clear_safe_halt(ArbitrationState state, HazardFlags current_hazards) {
  if (!state.safe_halt) return state;
  if (current_hazards.any()) {
    throw Error("HazardStillActive", "safe halt cannot be cleared while a hazard is active");
  }
  state.safe_halt = false;
  return state;
}

ArbitrationState select_mode(ArbitrationState state, ModePolicy policy) {
  state.selected_policy = policy;
  return state;
}

std::optional<ModePolicy> parse_policy(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "auto" || lowered == "autoladder") return ModePolicy{AutoLadder{}};
  auto mode = parse_mode(text);
  if (!mode || *mode == ModeId::Stop) return std::nullopt;
  return ModePolicy{ManualExclusive{*mode}};
}

std::string policy_name(const ModePolicy& policy) {
  if (const auto* manual = std::get_if<ManualExclusive>(&policy)) {
    return std::string(to_string(manual->mode));
  }
  return "AutoLadder";
}

}  // namespace wheelsim::arbitration
