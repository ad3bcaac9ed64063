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

// Threshold and pattern detectors for heart attack, fall, convulsion,
// temperature and SpO2.

#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wheelsim/decoders.hpp"
#include "wheelsim/json.hpp"
#include "wheelsim/types.hpp"

namespace wheelsim::vitals {

using decoders::AccelSample;

enum class AlertKind { HeartAttack, Fall, Convulsion, TempHigh, TempLow, SpO2Low };
enum class Severity { Green, Red };

std::string_view to_string(AlertKind kind);
std::optional<AlertKind> parse_alert_kind(std::string_view text);
std::string_view to_string(Severity severity);

struct Location {
  double x = 0.0;  // m
  double y = 0.0;
  bool operator==(const Location&) const = default;
};

/// Delivery outcome for one channel (outbox, webhook, stream).
struct Delivery {
  bool ok = false;
  int attempts = 0;
  std::string detail;
  bool operator==(const Delivery&) const = default;
};

struct AlertEvent {
  std::string id;  // assigned by the monitor service
  AlertKind kind = AlertKind::HeartAttack;
  Severity severity = Severity::Red;
  double value = 0.0;  // triggering measurement
  Millis t = 0;
  std::string patient_id;
  Location location;
  std::map<std::string, Delivery> delivered;
};

void to_json(json& j, const AlertEvent& e);
void from_json(const json& j, AlertEvent& e);

struct FallConfig {
  double free_fall_g = 0.3;
  Millis free_fall_min_ms = 120;
  double impact_g = 2.5;
  Millis impact_window_ms = 500;
  double rearm_tolerance_g = 0.2;
  Millis rearm_ms = 1000;
  Millis min_window_ms = 1000;
  double min_rate_hz = 50.0;
};

struct ConvulsionConfig {
  double min_peak_to_peak_g = 0.5;
  double min_freq_hz = 2.0;
  double max_freq_hz = 8.0;
  Millis persist_ms = 5000;
  double hr_gate_bpm = 100.0;
  Millis segment_ms = 2000;
  Millis hop_ms = 500;
  Millis min_window_ms = 6000;
  double rearm_tolerance_g = 0.2;
  Millis rearm_ms = 1000;
};

struct DetectorConfig {
  double hr_high = 140.0;
  double hr_low = 40.0;
  double temp_high = 38.0;
  double temp_low = 35.5;
  double spo2_low = 94.0;
  FallConfig fall;
  ConvulsionConfig convulsion;

  /// Throws Error("InvalidConfig") unless hr_low < hr_high and
  /// temp_low < temp_high.
  void validate() const;
};

void to_json(json& j, const DetectorConfig& c);
void from_json(const json& j, DetectorConfig& c);
DetectorConfig load_detector_config(const std::filesystem::path& path);

/// Strict on both sides: 140 and 40 are not alerts.
bool detect_heart_attack(double hr_bpm, const DetectorConfig& cfg = {});

/// Free fall (|a| below threshold for the minimum time) followed within the
/// impact window by an impact spike. Throws Error("InsufficientWindow") if
/// the window covers less than 1 s or is sampled below 50 Hz.
bool detect_fall(std::span<const AccelSample> window, const DetectorConfig& cfg = {});

/// Frequency estimate (Hz) of the dominant axis by hysteresis zero crossings.
double dominant_frequency_hz(std::span<const AccelSample> segment);

/// Peak-to-peak amplitude (g) of the axis with the largest variance.
double dominant_peak_to_peak_g(std::span<const AccelSample> segment);

/// Band-limited oscillation persisting for the minimum time, corroborated by
/// an elevated heart rate. Throws Error("InsufficientWindow") below 6 s.
bool detect_convulsion(std::span<const AccelSample> window, double hr_bpm, double spo2,
                       const DetectorConfig& cfg = {});

enum class TempStatus { Normal, TempHigh, TempLow };
TempStatus check_temperature(double temp_c, const DetectorConfig& cfg = {});

enum class SpO2Status { Normal, SpO2Low };
SpO2Status check_spo2(double spo2, const DetectorConfig& cfg = {});

struct Status {
  Severity severity = Severity::Green;
  std::vector<AlertEvent> events;
};

/// Red iff any threshold event is present; all events ride along.
Status classify(std::vector<AlertEvent> events);

/// Streaming fall detector holding the episode re-arm state. Samples at or
/// before the last seen timestamp are ignored, so overlapping windows can be
/// fed without double counting.
class FallDetector {
 public:
  explicit FallDetector(FallConfig cfg = {});
  /// Returns the impact time when a new episode is detected.
  std::optional<Millis> push(const AccelSample& s);
  std::vector<Millis> push_window(std::span<const AccelSample> window);
  bool armed() const { return armed_; }

 private:
  FallConfig cfg_;
  std::optional<Millis> last_t_;
  bool armed_ = true;
  std::optional<Millis> stable_since_;
  std::optional<Millis> free_fall_start_;
  std::optional<Millis> impact_deadline_;
};

/// Streaming convulsion detector; evaluates the trailing window every hop.
class ConvulsionDetector {
 public:
  explicit ConvulsionDetector(DetectorConfig cfg = {});
  /// Returns the detection time when a new episode is detected.
  std::optional<Millis> push(const AccelSample& s, double hr_bpm, double spo2);
  std::vector<Millis> push_window(std::span<const AccelSample> window, double hr_bpm, double spo2);

 private:
  DetectorConfig cfg_;
  std::deque<AccelSample> buffer_;
  std::optional<Millis> last_t_;
  std::optional<Millis> next_eval_;
  bool armed_ = true;
  std::optional<Millis> stable_since_;
};

}  // namespace wheelsim::vitals
