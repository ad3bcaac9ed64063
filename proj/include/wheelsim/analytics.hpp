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
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wheelsim/json.hpp"
#include "wheelsim/sim.hpp"

namespace wheelsim::analytics {

struct Pair {
  double module = 0.0;
  double reference = 0.0;
};

struct PairedReadings {
  std::string kind;   // hr, spo2, temp
  std::string units;  // bpm, %, C
  std::vector<Pair> pairs;
};

/// Reads a `module,reference` CSV. Throws Error("ParseError").
PairedReadings read_pairs_csv(std::istream& in, const std::string& kind);
PairedReadings load_pairs_csv(const std::filesystem::path& path, const std::string& kind);
std::string units_for(const std::string& kind);

struct BlandAltmanPoint {
  double mean = 0.0;
  double diff = 0.0;  // module - reference
};

struct AgreementReport {
  std::string kind;
  std::string units;
  std::size_t n = 0;
  double bias = 0.0;
  double sd = 0.0;  // sample (n - 1)
  double loa_low = 0.0;
  double loa_high = 0.0;
  double rmse = 0.0;
  std::vector<BlandAltmanPoint> points;
  std::vector<Pair> pairs;
};

inline constexpr double kLoaMultiplier = 1.96;

/// Throws Error("TooFewPairs") below two pairs.
AgreementReport bland_altman(const PairedReadings& readings);

/// Throws Error("TooFewPairs") on an empty set.
double rmse(std::span<const Pair> pairs);

struct AccuracyCell {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double percent = 0.0;
};

struct AccuracyTable {
  std::map<std::pair<ModeId, Direction>, AccuracyCell> cells;
  std::map<ModeId, double> modality_mean;
  double overall_mean = 0.0;
  /// Non-empty when the per-modality means disagree with the published
  /// headline accuracies.
  std::string note;
};

/// Headline per-modality accuracies (%) that accompany the published table.
const std::map<ModeId, double>& headline_accuracy();

/// Throws Error("EmptyCell") if any cell has zero trials.
AccuracyTable accuracy_table(const sim::TrialLog& log);

enum class Format { Csv, Json, PlotData };

/// Throws Error("InvalidArgument") for unknown names.
Format parse_format(std::string_view name);

std::string render(const AgreementReport& report, Format format);
std::string render(const AccuracyTable& table, Format format);

/// Writes the rendered bytes. Throws Error("IoFailure").
void emit_report(const AgreementReport& report, Format format, const std::filesystem::path& file);
void emit_report(const AccuracyTable& table, Format format, const std::filesystem::path& file);

}  // namespace wheelsim::analytics
