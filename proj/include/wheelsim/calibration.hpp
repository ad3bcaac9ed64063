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

// Two-point calibration, sensor quantization models, and seeded synthetic
// vital-sign sources.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wheelsim/json.hpp"
#include "wheelsim/types.hpp"

namespace wheelsim::calibration {

struct Anchor {
  double raw = 0.0;
  double reference = 0.0;
  bool operator==(const Anchor&) const = default;
};

struct CalibrationCoefficients {
  std::string channel;
  double gain = 1.0;
  double offset = 0.0;
  std::array<Anchor, 2> refs{};
};

/// Solves gain/offset from two (raw, reference) anchors.
/// Throws Error("DegenerateAnchors") when raw_hi == raw_lo.
CalibrationCoefficients two_point_fit(double raw_lo, double ref_lo, double raw_hi, double ref_hi,
                                      std::string channel = {});

inline double apply_calibration(const CalibrationCoefficients& c, double raw) {
  return c.gain * raw + c.offset;
}

/// DS18B20 model: rounds to the nearest 0.5 / 2^(bits-9) degC step, ties to
/// the even step. Throws Error("OutOfRange") outside [-55, 125] degC or for
/// bits outside 9..12.
double quantize_temperature(double true_c, int bits = 12);

/// ADXL345 model: 4 mg/LSB, saturating at the signed 13-bit range.
int quantize_accel(double g);

inline constexpr int kAccelMinCounts = -4096;
inline constexpr int kAccelMaxCounts = 4095;

enum class VitalKind { HeartRate, SpO2, Temperature };

std::string_view to_string(VitalKind kind);
std::optional<VitalKind> parse_vital_kind(std::string_view text);  // hr, spo2, temp

enum class Quality { Ok, Suspect };

struct RawSample {
  std::string channel;
  Millis t = 0;
  double raw = 0.0;
  bool operator==(const RawSample&) const = default;
};

struct CalibratedVital {
  VitalKind kind = VitalKind::HeartRate;
  double value = 0.0;
  Millis t = 0;
  Quality quality = Quality::Ok;
};

/// Applies `c` and clamps into the physical range of `kind`; a clamped value
/// is marked Suspect.
CalibratedVital calibrate(VitalKind kind, const CalibrationCoefficients& c, const RawSample& s);

/// Closed physical range of each vital kind.
std::pair<double, double> vital_range(VitalKind kind);

/// Ground-truth relation between the true quantity and the raw device
/// reading: raw = (true - offset) / gain, quantized per kind. The bundled
/// calibration files encode exactly these coefficients.
struct SensorModel {
  VitalKind kind = VitalKind::HeartRate;
  CalibrationCoefficients truth;

  double to_raw(double true_value) const;
};

/// Bundled sensor model for a vital. Each is anchored at two reference points;
/// temperature uses ice and boiling water.
SensorModel default_sensor(VitalKind kind);

/// Channel name used in trace files, such as "hr".
std::string channel_name(VitalKind kind);

struct NoiseModel {
  double sigma = 0.0;  // engineering units, zero-mean Gaussian
};

/// Profile value at time t. Known profiles: resting, paper-range (HR),
/// cohort (SpO2, temperature), tachycardia, bradycardia, hypoxic, fever,
/// hypothermia, and `constant:<value>`.
/// Throws Error("UnknownProfile").
double profile_value(VitalKind kind, const std::string& profile, Millis t);

struct TraceOptions {
  Millis duration_ms = 10'000;
  Millis period_ms = 1000;
  std::uint64_t seed = 1;
};

/// Deterministic raw trace: profile + noise through the default sensor model.
/// Throws Error("UnknownProfile"); duration must be positive.
std::vector<RawSample> generate_vital_trace(VitalKind kind, const std::string& profile,
                                            const NoiseModel& noise, const TraceOptions& options);

void to_json(json& j, const CalibrationCoefficients& c);
void from_json(const json& j, CalibrationCoefficients& c);

CalibrationCoefficients load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CalibrationCoefficients& c);

}  // namespace wheelsim::calibration
