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

#include "wheelsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "wheelsim/rng.hpp"

namespace wheelsim::calibration {
namespace {

double sweep(double center, double amplitude, Millis t, double period_s) {
  return center + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                       (period_s * 1000.0));
}

}  // namespace

CalibrationCoefficients two_point_fit(double raw_lo, double ref_lo, double raw_hi, double ref_hi,
                                      std::string channel) {
  if (raw_hi == raw_lo) {
    throw Error("DegenerateAnchors", "two-point calibration needs distinct raw anchors");
  }
  CalibrationCoefficients c;
  c.channel = std::move(channel);
  c.gain = (ref_hi - ref_lo) / (raw_hi - raw_lo);
  c.offset = ref_lo - c.gain * raw_lo;
  c.refs = {Anchor{raw_lo, ref_lo}, Anchor{raw_hi, ref_hi}};
  return c;
}

double quantize_temperature(double true_c, int bits) {
  if (bits < 9 || bits > 12) throw Error("OutOfRange", "DS18B20 resolution is 9..12 bits");
  if (!(true_c >= -55.0 && true_c <= 125.0)) {
    throw Error("OutOfRange", "DS18B20 range is -55..125 degC");
  }
  const double step = 0.5 / static_cast<double>(1 << (bits - 9));
  // nearbyint honours the current rounding mode; the default is
  // round-half-to-even.
  return std::nearbyint(true_c / step) * step;
}

int quantize_accel(double g) {
  const long counts = std::lround(g * 1000.0 / 4.0);
  return static_cast<int>(std::clamp<long>(counts, kAccelMinCounts, kAccelMaxCounts));
}

std::string_view to_string(VitalKind kind) {
  switch (kind) {
    case VitalKind::HeartRate: return "HeartRate";
    case VitalKind::SpO2: return "SpO2";
    case VitalKind::Temperature: return "Temperature";
  }
  return "?";
}

std::optional<VitalKind> parse_vital_kind(std::string_view text) {
  if (text == "hr" || text == "HeartRate") return VitalKind::HeartRate;
  if (text == "spo2" || text == "SpO2") return VitalKind::SpO2;
  if (text == "temp" || text == "Temperature") return VitalKind::Temperature;
  return std::nullopt;
}

std::string channel_name(VitalKind kind) {
  switch (kind) {
    case VitalKind::HeartRate: return "hr";
    case VitalKind::SpO2: return "spo2";
    case VitalKind::Temperature: return "temp";
  }
  return "?";
}

std::pair<double, double> vital_range(VitalKind kind) {
  switch (kind) {
    case VitalKind::HeartRate: return {0.0, 300.0};
    case VitalKind::SpO2: return {0.0, 100.0};
    case VitalKind::Temperature: return {-55.0, 125.0};
  }
  return {0.0, 0.0};
}

CalibratedVital calibrate(VitalKind kind, const CalibrationCoefficients& c, const RawSample& s) {
  const auto [lo, hi] = vital_range(kind);
  const double value = apply_calibration(c, s.raw);
  const double clamped = std::clamp(value, lo, hi);
  return {kind, clamped, s.t, clamped == value ? Quality::Ok : Quality::Suspect};
}

double SensorModel::to_raw(double true_value) const {
  const double raw = (true_value - truth.offset) / truth.gain;
  if (kind == VitalKind::Temperature) {
    return quantize_temperature(std::clamp(raw, -55.0, 125.0), 12);
  }
  return std::round(raw);
}

SensorModel default_sensor(VitalKind kind) {
  switch (kind) {
    case VitalKind::HeartRate:
      return {kind, two_point_fit(1260.0, 60.0, 2460.0, 120.0, "hr")};
    case VitalKind::SpO2:
      return {kind, two_point_fit(8850.0, 90.0, 9750.0, 99.0, "spo2")};
    case VitalKind::Temperature:
      return {kind, two_point_fit(2.0, 0.0, 97.5, 100.0, "temp")};
  }
  throw Error("UnknownProfile", "unknown vital kind");
}

double profile_value(VitalKind kind, const std::string& profile, Millis t) {
  constexpr std::string_view kConstant = "constant:";
  if (profile.rfind(kConstant, 0) == 0) {
    try {
      return std::stod(profile.substr(kConstant.size()));
    } catch (const std::exception&) {
      throw Error("UnknownProfile", "bad constant profile: " + profile);
    }
  }
  switch (kind) {
    case VitalKind::HeartRate:
      if (profile == "resting") return 72.0;
      if (profile == "paper-range") return sweep(80.0, 20.0, t, 120.0);
      if (profile == "tachycardia") return 150.0;
      if (profile == "bradycardia") return 35.0;
      if (profile == "seizure") return 118.0;
      break;
    case VitalKind::SpO2:
      if (profile == "resting") return 98.0;
      if (profile == "cohort") return sweep(96.5, 3.5, t, 90.0);
      if (profile == "hypoxic") return 90.0;
      break;
    case VitalKind::Temperature:
      if (profile == "resting") return 36.8;
      if (profile == "cohort") return sweep(36.7, 1.4, t, 150.0);
      if (profile == "fever") return 38.6;
      if (profile == "hypothermia") return 35.0;
      break;
  }
  throw Error("UnknownProfile",
              "unknown " + std::string(to_string(kind)) + " profile: " + profile);
}

std::vector<RawSample> generate_vital_trace(VitalKind kind, const std::string& profile,
                                            const NoiseModel& noise, const TraceOptions& options) {
  if (options.duration_ms <= 0 || options.period_ms <= 0) {
    throw Error("OutOfRange", "trace duration and period must be positive");
  }
  profile_value(kind, profile, 0);  // validates the profile name up front
  const SensorModel sensor = default_sensor(kind);
  const std::string channel = channel_name(kind);
  Rng rng(options.seed);

  std::vector<RawSample> out;
  for (Millis t = 0; t < options.duration_ms; t += options.period_ms) {
    const double measured = profile_value(kind, profile, t) + rng.normal(0.0, noise.sigma);
    out.push_back({channel, t, sensor.to_raw(measured)});
  }
  return out;
}

void to_json(json& j, const CalibrationCoefficients& c) {
  j = json{{"channel", c.channel},
           {"gain", c.gain},
           {"offset", c.offset},
           {"refs",
            json::array({json::array({c.refs[0].raw, c.refs[0].reference}),
                         json::array({c.refs[1].raw, c.refs[1].reference})})}};
}

void from_json(const json& j, CalibrationCoefficients& c) {
  c.channel = j.at("channel").get<std::string>();
  c.gain = j.at("gain").get<double>();
  c.offset = j.at("offset").get<double>();
  const auto& refs = j.at("refs");
  for (std::size_t i = 0; i < 2; ++i) {
    c.refs[i] = {refs.at(i).at(0).get<double>(), refs.at(i).at(1).get<double>()};
  }
  if (!std::isfinite(c.gain) || c.gain == 0.0) {
    throw Error("ParseError", "calibration gain must be finite and nonzero");
  }
}

CalibrationCoefficients load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoFailure", "cannot open " + path.string());
  return json::parse(in).get<CalibrationCoefficients>();
}

void save_calibration(const std::filesystem::path& path, const CalibrationCoefficients& c) {
  std::ofstream out(path);
  if (!out) throw Error("IoFailure", "cannot write " + path.string());
  out << json(c).dump(2) << '\n';
}

}  // namespace wheelsim::calibration
