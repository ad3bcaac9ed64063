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

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "wheelsim/types.hpp"

namespace wheelsim {

struct ChannelRow {
  Millis t_ms = 0;
  std::string channel;
  double value = 0.0;
};

/// Reads `t_ms,channel,<value_column>` rows. The header is required and
/// checked.
std::vector<ChannelRow> read_channel_csv(std::istream& in, const std::string& value_column);

void write_channel_csv(std::ostream& out, const std::string& value_column,
                       const std::vector<ChannelRow>& rows);

/// Shortest round-trip decimal text for a double, stable across runs.
std::string format_number(double v);

}  // namespace wheelsim
