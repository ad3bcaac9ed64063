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

// Priority-ladder arbitration between the four input modalities, with the
// hazard latch and joystick debounce. Everything here is a pure state
// transition: callers own the ArbitrationState and thread it through ticks.

#pragma once

#include <optional>
#include <variant>

#include "wheelsim/types.hpp"

namespace wheelsim::arbitration {

/// Joystick deadzone in centered ADC counts. Strictly greater wins.
inline constexpr int kJoystickThreshold = 50;
/// Continuous above-threshold dwell required before the joystick rung fires.
inline constexpr Millis kJoystickDebounceMs = 250;
/// Gaze eccentricity (degrees) the EOG rung must strictly exceed.
inline constexpr double kEogThresholdDeg = 12.0;
/// Fixed control period (50 Hz).
inline constexpr Millis kTickMs = 20;

struct MotionCommand {
  Direction direction = Direction::Stop;
  double speed = 0.0;  // fraction of max speed, [0, 1]
  ModeId source = ModeId::Stop;

  static MotionCommand stop(ModeId source = ModeId::Stop) { return {Direction::Stop, 0.0, source}; }
  bool operator==(const MotionCommand&) const = default;
};

/// One snapshot of decoded inputs and hazard flags for a single tick.
struct ControlInputs {
  int joy_speed = 0;  // centered counts, -2048..2047
  bool joy_pressed = false;
  // Joystick direction from the dominant axis. When absent, the sign of
  // joy_speed selects Forward/Backward.
  std::optional<Direction> joy_command;
  bool voice_ready = false;
  std::optional<Direction> voice_command;
  bool gesture_ok = false;
  std::optional<Direction> gesture_command;
  double eog_angle = 0.0;  // degrees, >= 0
  std::optional<Direction> eog_command;
  bool fall_flag = false;
  bool health_alert = false;
  bool obstacle_flag = false;
  Millis timestamp = 0;

  bool any_hazard() const { return fall_flag || health_alert || obstacle_flag; }
  bool operator==(const ControlInputs&) const = default;
};

struct AutoLadder {
  bool operator==(const AutoLadder&) const = default;
};
struct ManualExclusive {
  ModeId mode = ModeId::Joystick;
  bool operator==(const ManualExclusive&) const = default;
};
using ModePolicy = std::variant<AutoLadder, ManualExclusive>;

struct JoystickDebounce {
  std::optional<Millis> first_seen_ms;
  bool operator==(const JoystickDebounce&) const = default;
};

struct ArbitrationState {
  bool safe_halt = false;
  JoystickDebounce joystick_debounce;
  ModePolicy selected_policy = AutoLadder{};
  Millis last_tick_ms = 0;

  bool operator==(const ArbitrationState&) const = default;
};

/// Tunables that are not part of the ladder itself.
struct ArbitrationConfig {
  /// Speed fraction used for the discrete modalities (voice, gesture, EOG),
  /// which carry a direction but no magnitude.
  double discrete_speed = 0.5;
};

struct ArbitrationResult {
  ModeId mode = ModeId::Stop;
  MotionCommand command;
  ArbitrationState state;
};

struct DebounceResult {
  bool ok = false;
  ArbitrationState state;
};

/// Tracks continuous above-threshold dwell of the joystick. The timer starts
/// on the first above-threshold tick and resets on any tick at or below it.
DebounceResult debounce_ok(ArbitrationState state, bool above_threshold, Millis now);

/// One control tick. Hazards latch safe_halt; the latch holds Stop until
/// clear_safe_halt succeeds; otherwise the first eligible rung wins in the
/// order Joystick > Voice > Gesture > EOG.
ArbitrationResult arbitrate(const ControlInputs& inputs, ArbitrationState state,
                            const ArbitrationConfig& config = {});

struct HazardFlags {
  bool fall = false;
  bool health = false;
  bool obstacle = false;
  bool any() const { return fall || health || obstacle; }
};

/// Operator reset of the latch. Throws Error("HazardStillActive") while any
/// hazard is still present. Clearing an unlatched state is a no-op.
ArbitrationState clear_safe_halt(ArbitrationState state, HazardFlags current_hazards);

/// Mode-switch buttons. AutoLadder restores the plain ladder. The latch is
/// left untouched.
ArbitrationState select_mode(ArbitrationState state, ModePolicy policy);

/// Accepts "auto"/"AutoLadder" or a modality name (case-insensitive).
std::optional<ModePolicy> parse_policy(std::string_view text);
std::string policy_name(const ModePolicy& policy);

}  // namespace wheelsim::arbitration
