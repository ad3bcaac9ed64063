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

// nlohmann::json bindings for the value types that cross file or wire
// boundaries.

#pragma once

#include <json.hpp>

#include "wheelsim/arbitration.hpp"
#include "wheelsim/control_loop.hpp"
#include "wheelsim/types.hpp"

namespace wheelsim {

using nlohmann::json;

void to_json(json& j, ModeId mode);
void from_json(const json& j, ModeId& mode);
void to_json(json& j, Direction dir);
void from_json(const json& j, Direction& dir);

namespace arbitration {
void to_json(json& j, const ControlInputs& in);
void from_json(const json& j, ControlInputs& in);
/// Timeline line: {t_ms, mode, direction, speed}.
void to_json(json& j, const TickOutput& out);
}  // namespace arbitration

/// Compact dump with a trailing newline, for JSON-Lines files.
std::string jsonl(const json& j);

}  // namespace wheelsim
