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

#include "wheelsim/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

namespace wheelsim {
namespace {

constexpr std::array<std::string_view, 5> kModeNames = {"Stop", "Joystick", "Voice", "Gesture",
                                                        "EOG"};
constexpr std::array<std::string_view, 5> kDirectionNames = {"Stop", "Forward", "Backward",
                                                             "Left", "Right"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(ModeId mode) { return kModeNames[static_cast<std::size_t>(mode)]; }

std::string_view to_string(Direction dir) {
  return kDirectionNames[static_cast<std::size_t>(dir)];
}

std::optional<ModeId> parse_mode(std::string_view text) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (iequals(text, kModeNames[i])) return static_cast<ModeId>(i);
  }
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view text) {
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i) {
    if (iequals(text, kDirectionNames[i])) return static_cast<Direction>(i);
  }
  return std::nullopt;
}

}  // namespace wheelsim
