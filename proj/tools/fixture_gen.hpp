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

#include <filesystem>

namespace wheelsim::tools {

/// Regenerates every synthetic data fixture under `dir` (calibration pairs,
/// detector corpus, voice corpus, frame vectors, calibration files).
/// Scenarios and the fitted trial profile are written by other commands.
void generate_fixtures(const std::filesystem::path& dir);

}  // namespace wheelsim::tools
