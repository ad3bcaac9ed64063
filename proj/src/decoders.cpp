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

#include "wheelsim/decoders.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "wheelsim/csv.hpp"

namespace wheelsim::decoders {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string normalize(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n\v\f");
  std::string out(text.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

int adc_map(double volts) {
  if (!(volts >= 0.0 && volts <= kAdcFullScaleVolts)) {
    throw Error("OutOfRange", "ADC input must be within [0, 3.3] V");
  }
  // std::lround rounds half away from zero.
  return static_cast<int>(std::lround(volts / kAdcFullScaleVolts * kAdcMax));
}

JoystickReading decode_joystick(const JoystickRaw& raw) {
  if (raw.pressed) return {};
  const int cx = raw.x_counts - kAdcCenter;
  const int cy = raw.y_counts - kAdcCenter;
  JoystickReading r;
  r.joy_speed = std::max(std::abs(cx), std::abs(cy));
  if (r.joy_speed == 0) return r;
  if (std::abs(cy) >= std::abs(cx)) {
    r.direction = cy > 0 ? Direction::Forward : Direction::Backward;
  } else {
    r.direction = cx > 0 ? Direction::Right : Direction::Left;
  }
  r.speed = std::min(1.0, r.joy_speed / 2047.0);
  return r;
}

std::optional<Direction> parse_voice(std::string_view text) {
  static const std::array<std::pair<std::string_view, Direction>, 5> kLexicon = {{
      {"forward", Direction::Forward},
      {"backward", Direction::Backward},
      {"left", Direction::Left},
      {"right", Direction::Right},
      {"stop", Direction::Stop},
  }};
  const std::string word = normalize(text);
  for (const auto& [entry, dir] : kLexicon) {
    if (word == entry) return dir;
  }
  return std::nullopt;
}

double AccelSample::magnitude() const { return std::sqrt(ax * ax + ay * ay + az * az); }

Tilt tilt_of(const AccelSample& s) {
  return {std::atan2(-s.ax, s.az) * kRadToDeg, std::atan2(s.ay, s.az) * kRadToDeg};
}

std::optional<Direction> decode_gesture(const AccelSample& sample, const GestureConfig& cfg) {
  const Tilt tilt = tilt_of(sample);
  const double limit = cfg.tilt_threshold_deg;
  if (tilt.pitch_deg > limit) return Direction::Forward;
  if (tilt.pitch_deg < -limit) return Direction::Backward;
  if (tilt.roll_deg > limit) return Direction::Right;
  if (tilt.roll_deg < -limit) return Direction::Left;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// EOG

EogDecoder::EogDecoder(EogConfig cfg) : cfg_(cfg) {}

void EogDecoder::push(const EogSample& sample) {
  const bool horizontal = sample.channel == EogChannel::Horizontal;
  Channel& ch = horizontal ? horizontal_ : vertical_;
  const double baseline = horizontal ? cfg_.horizontal_baseline_mv : cfg_.vertical_baseline_mv;

  EogSample centered = sample;
  centered.potential_mv -= baseline;
  ch.window.push_back(centered);
  ch.sum += centered.potential_mv;
  while (!ch.window.empty() && ch.window.front().t <= sample.t - cfg_.filter_window_ms) {
    ch.sum -= ch.window.front().potential_mv;
    ch.window.pop_front();
  }
  ch.filtered = ch.sum / static_cast<double>(ch.window.size());
  if (!ch.first_t) ch.first_t = sample.t;
  ch.last_t = sample.t;

  if (!horizontal) update_blink(sample.t, ch.filtered);
  update_dwell(sample.t);
}

double EogDecoder::angle_deg() const {
  return std::max(std::abs(horizontal_.filtered), std::abs(vertical_.filtered)) /
         cfg_.mv_per_degree;
}

std::optional<Direction> EogDecoder::gaze_direction() const {
  if (!(angle_deg() > cfg_.angle_threshold_deg)) return std::nullopt;
  if (std::abs(vertical_.filtered) > std::abs(horizontal_.filtered)) {
    return vertical_.filtered > 0 ? Direction::Forward : Direction::Backward;
  }
  return horizontal_.filtered > 0 ? Direction::Right : Direction::Left;
}

void EogDecoder::update_dwell(Millis t) {
  const auto dir = gaze_direction();
  if (dir != dwell_dir_) {
    dwell_dir_ = dir;
    dwell_start_ = t;
    dwell_emitted_ = false;
    return;
  }
  if (dir && !dwell_emitted_ && t - dwell_start_ >= cfg_.dwell_ms) {
    dwell_emitted_ = true;
    pending_events_.push_back({t, *dir});
    all_events_.push_back({t, *dir});
  }
}

void EogDecoder::update_blink(Millis t, double filtered_mv) {
  const bool above = filtered_mv > cfg_.blink_threshold_mv;
  if (above) {
    if (!pulse_start_) pulse_start_ = t;
    return;
  }
  if (!pulse_start_) return;
  const Millis start = *pulse_start_;
  const Millis width = t - start;
  pulse_start_.reset();
  if (width < cfg_.blink_min_width_ms || width > cfg_.blink_max_width_ms) return;

  blinks_.push_back({start, t});
  if (pending_blink_start_ && start - *pending_blink_start_ <= cfg_.blink_pair_window_ms) {
    pending_blink_start_.reset();
    pending_events_.push_back({t, Direction::Stop});
    all_events_.push_back({t, Direction::Stop});
  } else {
    pending_blink_start_ = start;
  }
}

std::vector<EogEvent> EogDecoder::take_events() {
  std::vector<EogEvent> out;
  out.swap(pending_events_);
  return out;
}

Millis EogDecoder::horizontal_history_ms() const {
  if (!horizontal_.first_t) return 0;
  return *horizontal_.last_t - *horizontal_.first_t;
}

EogReading decode_eog(const EogTrace& trace, Millis now, const EogConfig& cfg) {
  std::vector<EogSample> samples;
  samples.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    if (s.t <= now) samples.push_back(s);
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const EogSample& a, const EogSample& b) { return a.t < b.t; });

  EogDecoder decoder(cfg);
  for (const auto& s : samples) decoder.push(s);
  if (decoder.horizontal_history_ms() < cfg.min_history_ms) {
    throw Error("InsufficientHistory", "EOG decoding needs at least 200 ms of horizontal history");
  }

  EogReading r;
  r.angle_deg = decoder.angle_deg();
  r.events = decoder.all_events();
  r.blinks = decoder.blinks();
  if (!r.events.empty()) r.command = r.events.back().direction;
  return r;
}

// ---------------------------------------------------------------------------
// File readers

EogTrace read_eog_csv(std::istream& in) {
  EogTrace trace;
  for (const auto& row : read_channel_csv(in, "value")) {
    EogSample s{row.t_ms, row.value, EogChannel::Horizontal};
    if (row.channel == "horizontal" || row.channel == "h") {
      s.channel = EogChannel::Horizontal;
    } else if (row.channel == "vertical" || row.channel == "v") {
      s.channel = EogChannel::Vertical;
    } else {
      throw Error("ParseError", "unknown EOG channel: " + row.channel);
    }
    trace.samples.push_back(s);
  }
  return trace;
}

std::vector<AccelSample> read_accel_csv(std::istream& in) {
  std::map<Millis, AccelSample> by_time;
  for (const auto& row : read_channel_csv(in, "value")) {
    if (row.channel != "ax" && row.channel != "ay" && row.channel != "az") continue;
    auto& sample = by_time[row.t_ms];
    sample.t = row.t_ms;
    if (row.channel == "ax") sample.ax = row.value;
    if (row.channel == "ay") sample.ay = row.value;
    if (row.channel == "az") sample.az = row.value;
  }
  std::vector<AccelSample> out;
  out.reserve(by_time.size());
  for (auto& [t, s] : by_time) out.push_back(s);
  return out;
}

std::vector<VoiceCase> read_voice_corpus(std::istream& in) {
  std::vector<VoiceCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error("ParseError", "voice corpus line lacks a tab");
    VoiceCase c;
    c.utterance = line.substr(0, tab);
    const std::string label = line.substr(tab + 1);
    if (label != "none") {
      c.expected = parse_direction(label);
      if (!c.expected) throw Error("ParseError", "unknown voice label: " + label);
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace wheelsim::decoders
