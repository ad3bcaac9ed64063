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

#include "wheelsim/json.hpp"

namespace wheelsim {
namespace {

json optional_direction(const std::optional<Direction>& dir) {
  return dir ? json(*dir) : json(nullptr);
}

std::optional<Direction> read_optional_direction(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<Direction>();
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

void to_json(json& j, ModeId mode) { j = std::string(to_string(mode)); }

void from_json(const json& j, ModeId& mode) {
  auto parsed = parse_mode(j.get<std::string>());
  if (!parsed) throw Error("ParseError", "unknown mode: " + j.get<std::string>());
  mode = *parsed;
}

void to_json(json& j, Direction dir) { j = std::string(to_string(dir)); }

void from_json(const json& j, Direction& dir) {
  auto parsed = parse_direction(j.get<std::string>());
  if (!parsed) throw Error("ParseError", "unknown direction: " + j.get<std::string>());
  dir = *parsed;
}

namespace arbitration {

void to_json(json& j, const ControlInputs& in) {
  j = json{{"joy_speed", in.joy_speed},
           {"joy_pressed", in.joy_pressed},
           {"joy_command", optional_direction(in.joy_command)},
           {"voice_ready", in.voice_ready},
           {"voice_command", optional_direction(in.voice_command)},
           {"gesture_ok", in.gesture_ok},
           {"gesture_command", optional_direction(in.gesture_command)},
           {"eog_angle", in.eog_angle},
           {"eog_command", optional_direction(in.eog_command)},
           {"fall_flag", in.fall_flag},
           {"health_alert", in.health_alert},
           {"obstacle_flag", in.obstacle_flag},
           {"timestamp", in.timestamp}};
}

void from_json(const json& j, ControlInputs& in) {
  in.joy_speed = value_or(j, "joy_speed", 0);
  in.joy_pressed = value_or(j, "joy_pressed", false);
  in.joy_command = read_optional_direction(j, "joy_command");
  in.voice_ready = value_or(j, "voice_ready", false);
  in.voice_command = read_optional_direction(j, "voice_command");
  in.gesture_ok = value_or(j, "gesture_ok", false);
  in.gesture_command = read_optional_direction(j, "gesture_command");
  in.eog_angle = value_or(j, "eog_angle", 0.0);
  in.eog_command = read_optional_direction(j, "eog_command");
  in.fall_flag = value_or(j, "fall_flag", false);
  in.health_alert = value_or(j, "health_alert", false);
  in.obstacle_flag = value_or(j, "obstacle_flag", false);
  in.timestamp = value_or<Millis>(j, "timestamp", 0);
  if (in.eog_angle < 0.0) throw Error("ParseError", "eog_angle must be >= 0");
}

void to_json(json& j, const TickOutput& out) {
  j = json{{"t_ms", out.t_ms},
           {"mode", out.mode},
           {"direction", out.command.direction},
           {"speed", out.command.speed}};
}

}  // namespace arbitration

std::string jsonl(const json& j) { return j.dump() + "\n"; }

}  // namespace wheelsim
