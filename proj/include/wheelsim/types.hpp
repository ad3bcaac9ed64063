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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wheelsim {

/// Milliseconds of simulated (or wall) time.
using Millis = std::int64_t;

/// Control modality that owns the motion output. Stop is the default.
enum class ModeId : std::uint8_t { Stop = 0, Joystick, Voice, Gesture, EOG };

enum class Direction : std::uint8_t { Stop = 0, Forward, Backward, Left, Right };

std::string_view to_string(ModeId mode);
std::string_view to_string(Direction dir);

std::optional<ModeId> parse_mode(std::string_view text);
std::optional<Direction> parse_direction(std::string_view text);

/// Base class for all errors raised by the library. `code()` is a stable
/// machine-readable identifier such as "OutOfRange" or "AuthFailure".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace wheelsim
