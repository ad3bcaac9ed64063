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

#include "wheelsim/vitals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace wheelsim::vitals {
namespace {

constexpr std::array<std::string_view, 6> kAlertNames = {"HeartAttack", "Fall",    "Convulsion",
                                                         "TempHigh",    "TempLow", "SpO2Low"};

struct Coverage {
  double span_ms = 0.0;
  double mean_dt_ms = 0.0;
  double covered_ms() const { return span_ms + mean_dt_ms; }
};

Coverage coverage_of(std::span<const AccelSample> window) {
  if (window.size() < 2) return {};
  Coverage c;
  c.span_ms = static_cast<double>(window.back().t - window.front().t);
  c.mean_dt_ms = c.span_ms / static_cast<double>(window.size() - 1);
  return c;
}

void require_window(std::span<const AccelSample> window, Millis min_ms, double min_rate_hz) {
  const Coverage c = coverage_of(window);
  if (window.size() < 2 || c.covered_ms() + 1e-9 < static_cast<double>(min_ms) ||
      (min_rate_hz > 0.0 && c.mean_dt_ms > 1000.0 / min_rate_hz + 1e-9)) {
    throw Error("InsufficientWindow", "accelerometer window too short or too sparse");
  }
}

enum class Axis { X, Y, Z };

double axis_value(const AccelSample& s, Axis axis) {
  switch (axis) {
    case Axis::X: return s.ax;
    case Axis::Y: return s.ay;
    case Axis::Z: return s.az;
  }
  return 0.0;
}

Axis dominant_axis(std::span<const AccelSample> segment) {
  Axis best = Axis::Z;
  double best_var = -1.0;
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    double mean = 0.0;
    for (const auto& s : segment) mean += axis_value(s, axis);
    mean /= static_cast<double>(segment.size());
    double var = 0.0;
    for (const auto& s : segment) var += std::pow(axis_value(s, axis) - mean, 2);
    if (var > best_var) {
      best_var = var;
      best = axis;
    }
  }
  return best;
}

bool stable_near_1g(const AccelSample& s, double tolerance) {
  return std::abs(s.magnitude() - 1.0) <= tolerance;
}

}  // namespace

std::string_view to_string(AlertKind kind) { return kAlertNames[static_cast<std::size_t>(kind)]; }

std::optional<AlertKind> parse_alert_kind(std::string_view text) {
  for (std::size_t i = 0; i < kAlertNames.size(); ++i) {
    if (text == kAlertNames[i]) return static_cast<AlertKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Red ? "Red" : "Green";
}

void to_json(json& j, const AlertEvent& e) {
  json delivered = json::object();
  for (const auto& [channel, d] : e.delivered) {
    delivered[channel] = {{"ok", d.ok}, {"attempts", d.attempts}, {"detail", d.detail}};
  }
  j = json{{"id", e.id},
           {"kind", std::string(to_string(e.kind))},
           {"severity", std::string(to_string(e.severity))},
           {"value", e.value},
           {"t", e.t},
           {"patient_id", e.patient_id},
           {"location", {{"x", e.location.x}, {"y", e.location.y}}},
           {"delivered", delivered}};
}

void from_json(const json& j, AlertEvent& e) {
  e.id = j.at("id").get<std::string>();
  const auto kind = parse_alert_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error("MalformedPayload", "unknown alert kind");
  e.kind = *kind;
  e.severity = j.at("severity").get<std::string>() == "Red" ? Severity::Red : Severity::Green;
  e.value = j.at("value").get<double>();
  e.t = j.at("t").get<Millis>();
  e.patient_id = j.at("patient_id").get<std::string>();
  e.location = {j.at("location").at("x").get<double>(), j.at("location").at("y").get<double>()};
  e.delivered.clear();
  if (j.contains("delivered")) {
    for (const auto& [channel, d] : j.at("delivered").items()) {
      e.delivered[channel] = {d.at("ok").get<bool>(), d.at("attempts").get<int>(),
                              d.value("detail", std::string())};
    }
  }
}

void DetectorConfig::validate() const {
  if (!(hr_low < hr_high)) throw Error("InvalidConfig", "hr_low must be below hr_high");
  if (!(temp_low < temp_high)) throw Error("InvalidConfig", "temp_low must be below temp_high");
}

void to_json(json& j, const DetectorConfig& c) {
  j = json{{"hr_high", c.hr_high},
           {"hr_low", c.hr_low},
           {"temp_high", c.temp_high},
           {"temp_low", c.temp_low},
           {"spo2_low", c.spo2_low},
           {"fall",
            {{"free_fall_g", c.fall.free_fall_g},
             {"free_fall_min_ms", c.fall.free_fall_min_ms},
             {"impact_g", c.fall.impact_g},
             {"impact_window_ms", c.fall.impact_window_ms},
             {"rearm_tolerance_g", c.fall.rearm_tolerance_g},
             {"rearm_ms", c.fall.rearm_ms}}},
           {"convulsion",
            {{"min_peak_to_peak_g", c.convulsion.min_peak_to_peak_g},
             {"min_freq_hz", c.convulsion.min_freq_hz},
             {"max_freq_hz", c.convulsion.max_freq_hz},
             {"persist_ms", c.convulsion.persist_ms},
             {"hr_gate_bpm", c.convulsion.hr_gate_bpm}}}};
}

void from_json(const json& j, DetectorConfig& c) {
  c = DetectorConfig{};
  c.hr_high = j.value("hr_high", c.hr_high);
  c.hr_low = j.value("hr_low", c.hr_low);
  c.temp_high = j.value("temp_high", c.temp_high);
  c.temp_low = j.value("temp_low", c.temp_low);
  c.spo2_low = j.value("spo2_low", c.spo2_low);
  if (auto it = j.find("fall"); it != j.end()) {
    c.fall.free_fall_g = it->value("free_fall_g", c.fall.free_fall_g);
    c.fall.free_fall_min_ms = it->value("free_fall_min_ms", c.fall.free_fall_min_ms);
    c.fall.impact_g = it->value("impact_g", c.fall.impact_g);
    c.fall.impact_window_ms = it->value("impact_window_ms", c.fall.impact_window_ms);
    c.fall.rearm_tolerance_g = it->value("rearm_tolerance_g", c.fall.rearm_tolerance_g);
    c.fall.rearm_ms = it->value("rearm_ms", c.fall.rearm_ms);
  }
  if (auto it = j.find("convulsion"); it != j.end()) {
    auto& cv = c.convulsion;
    cv.min_peak_to_peak_g = it->value("min_peak_to_peak_g", cv.min_peak_to_peak_g);
    cv.min_freq_hz = it->value("min_freq_hz", cv.min_freq_hz);
    cv.max_freq_hz = it->value("max_freq_hz", cv.max_freq_hz);
    cv.persist_ms = it->value("persist_ms", cv.persist_ms);
    cv.hr_gate_bpm = it->value("hr_gate_bpm", cv.hr_gate_bpm);
  }
  c.validate();
}

DetectorConfig load_detector_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoFailure", "cannot open " + path.string());
  return json::parse(in).get<DetectorConfig>();
}

bool detect_heart_attack(double hr_bpm, const DetectorConfig& cfg) {
  return hr_bpm > cfg.hr_high || hr_bpm < cfg.hr_low;
}

bool detect_fall(std::span<const AccelSample> window, const DetectorConfig& cfg) {
  const FallConfig& f = cfg.fall;
  require_window(window, f.min_window_ms, f.min_rate_hz);

  std::size_t i = 0;
  while (i < window.size()) {
    if (!(window[i].magnitude() < f.free_fall_g)) {
      ++i;
      continue;
    }
    const Millis start = window[i].t;
    std::size_t j = i;
    while (j < window.size() && window[j].magnitude() < f.free_fall_g) ++j;
    const Millis end = j < window.size() ? window[j].t : window.back().t;
    if (end - start >= f.free_fall_min_ms) {
      for (std::size_t k = j; k < window.size() && window[k].t <= end + f.impact_window_ms; ++k) {
        if (window[k].magnitude() >= f.impact_g) return true;
      }
    }
    i = j;
  }
  return false;
}

double dominant_peak_to_peak_g(std::span<const AccelSample> segment) {
  if (segment.empty()) return 0.0;
  const Axis axis = dominant_axis(segment);
  auto [lo, hi] = std::minmax_element(segment.begin(), segment.end(),
                                      [axis](const AccelSample& a, const AccelSample& b) {
                                        return axis_value(a, axis) < axis_value(b, axis);
                                      });
  return axis_value(*hi, axis) - axis_value(*lo, axis);
}

double dominant_frequency_hz(std::span<const AccelSample> segment) {
  if (segment.size() < 3) return 0.0;
  const Axis axis = dominant_axis(segment);
  double mean = 0.0;
  for (const auto& s : segment) mean += axis_value(s, axis);
  mean /= static_cast<double>(segment.size());

  // Schmitt-trigger crossings at a quarter of the half-amplitude reject noise
  // riding on the mean.
  const double band = 0.25 * dominant_peak_to_peak_g(segment) / 2.0;
  int state = 0;
  int transitions = 0;
  for (const auto& s : segment) {
    const double x = axis_value(s, axis) - mean;
    const int next = x > band ? 1 : (x < -band ? -1 : state);
    if (state != 0 && next != state) ++transitions;
    state = next;
  }
  const Coverage c = coverage_of(segment);
  const double seconds = c.covered_ms() / 1000.0;
  return seconds > 0.0 ? transitions / 2.0 / seconds : 0.0;
}

bool detect_convulsion(std::span<const AccelSample> window, double hr_bpm, double /*spo2*/,
                       const DetectorConfig& cfg) {
  const ConvulsionConfig& cv = cfg.convulsion;
  require_window(window, cv.min_window_ms, 0.0);
  if (!(hr_bpm > cv.hr_gate_bpm)) return false;

  const Coverage cov = coverage_of(window);
  const double end_exclusive = static_cast<double>(window.back().t) + cov.mean_dt_ms;
  std::optional<Millis> run_start;
  Millis best_span = 0;

  for (Millis seg = window.front().t;
       static_cast<double>(seg + cv.segment_ms) <= end_exclusive + 1e-9; seg += cv.hop_ms) {
    auto first = std::lower_bound(window.begin(), window.end(), seg,
                                  [](const AccelSample& s, Millis t) { return s.t < t; });
    auto last = std::lower_bound(first, window.end(), seg + cv.segment_ms,
                                 [](const AccelSample& s, Millis t) { return s.t < t; });
    std::span<const AccelSample> segment(first, last);
    const double freq = dominant_frequency_hz(segment);
    bool qualifies = dominant_peak_to_peak_g(segment) >= cv.min_peak_to_peak_g &&
                     freq >= cv.min_freq_hz && freq <= cv.max_freq_hz;
    // Every hop-sized block must carry the amplitude too, otherwise a segment
    // that merely overlaps the edge of a burst would stretch the run.
    for (Millis b = seg; qualifies && b < seg + cv.segment_ms; b += cv.hop_ms) {
      auto b0 = std::lower_bound(first, last, b,
                                 [](const AccelSample& s, Millis t) { return s.t < t; });
      auto b1 = std::lower_bound(b0, last, b + cv.hop_ms,
                                 [](const AccelSample& s, Millis t) { return s.t < t; });
      qualifies = dominant_peak_to_peak_g(std::span<const AccelSample>(b0, b1)) >=
                  cv.min_peak_to_peak_g;
    }
    if (qualifies) {
      if (!run_start) run_start = seg;
      best_span = std::max(best_span, seg + cv.segment_ms - *run_start);
    } else {
      run_start.reset();
    }
  }
  return best_span >= cv.persist_ms;
}

TempStatus check_temperature(double temp_c, const DetectorConfig& cfg) {
  if (temp_c > cfg.temp_high) return TempStatus::TempHigh;
  if (temp_c < cfg.temp_low) return TempStatus::TempLow;
  return TempStatus::Normal;
}

SpO2Status check_spo2(double spo2, const DetectorConfig& cfg) {
  return spo2 < cfg.spo2_low ? SpO2Status::SpO2Low : SpO2Status::Normal;
}

Status classify(std::vector<AlertEvent> events) {
  Status status;
  for (const auto& e : events) {
    if (e.severity == Severity::Red) status.severity = Severity::Red;
  }
  status.events = std::move(events);
  return status;
}

// ---------------------------------------------------------------------------

FallDetector::FallDetector(FallConfig cfg) : cfg_(cfg) {}

std::optional<Millis> FallDetector::push(const AccelSample& s) {
  if (last_t_ && s.t <= *last_t_) return std::nullopt;
  last_t_ = s.t;
  const double m = s.magnitude();

  if (!armed_) {
    if (stable_near_1g(s, cfg_.rearm_tolerance_g)) {
      if (!stable_since_) stable_since_ = s.t;
      if (s.t - *stable_since_ >= cfg_.rearm_ms) {
        armed_ = true;
        stable_since_.reset();
      }
    } else {
      stable_since_.reset();
    }
    return std::nullopt;
  }

  if (m < cfg_.free_fall_g) {
    if (!free_fall_start_) free_fall_start_ = s.t;
    return std::nullopt;
  }
  if (free_fall_start_) {
    if (s.t - *free_fall_start_ >= cfg_.free_fall_min_ms) {
      impact_deadline_ = s.t + cfg_.impact_window_ms;
    }
    free_fall_start_.reset();
  }
  if (impact_deadline_) {
    if (s.t > *impact_deadline_) {
      impact_deadline_.reset();
    } else if (m >= cfg_.impact_g) {
      impact_deadline_.reset();
      armed_ = false;
      return s.t;
    }
  }
  return std::nullopt;
}

std::vector<Millis> FallDetector::push_window(std::span<const AccelSample> window) {
  std::vector<Millis> fired;
  for (const auto& s : window) {
    if (auto t = push(s)) fired.push_back(*t);
  }
  return fired;
}

ConvulsionDetector::ConvulsionDetector(DetectorConfig cfg) : cfg_(std::move(cfg)) {}

std::optional<Millis> ConvulsionDetector::push(const AccelSample& s, double hr_bpm, double spo2) {
  if (last_t_ && s.t <= *last_t_) return std::nullopt;
  last_t_ = s.t;
  const ConvulsionConfig& cv = cfg_.convulsion;

  buffer_.push_back(s);
  while (!buffer_.empty() && buffer_.front().t <= s.t - cv.min_window_ms) buffer_.pop_front();

  if (!armed_) {
    if (stable_near_1g(s, cv.rearm_tolerance_g)) {
      if (!stable_since_) stable_since_ = s.t;
      if (s.t - *stable_since_ >= cv.rearm_ms) {
        armed_ = true;
        stable_since_.reset();
        // The previous episode must not leak into the next evaluation.
        buffer_.clear();
        next_eval_.reset();
      }
    } else {
      stable_since_.reset();
    }
    return std::nullopt;
  }

  if (next_eval_ && s.t < *next_eval_) return std::nullopt;
  std::vector<AccelSample> window(buffer_.begin(), buffer_.end());
  if (coverage_of(window).covered_ms() + 1e-9 < static_cast<double>(cv.min_window_ms)) {
    return std::nullopt;
  }
  next_eval_ = s.t + cv.hop_ms;
  if (detect_convulsion(window, hr_bpm, spo2, cfg_)) {
    armed_ = false;
    stable_since_.reset();
    return s.t;
  }
  return std::nullopt;
}

std::vector<Millis> ConvulsionDetector::push_window(std::span<const AccelSample> window,
                                                    double hr_bpm, double spo2) {
  std::vector<Millis> fired;
  for (const auto& s : window) {
    if (auto t = push(s, hr_bpm, spo2)) fired.push_back(*t);
  }
  return fired;
}

}  // namespace wheelsim::vitals
