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

// Raw modality signals to ControlInputs fields: joystick ADC counts,
// transcribed speech, glove accelerometer tilt and EOG potentials.

#pragma once

#include <deque>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wheelsim/types.hpp"

namespace wheelsim::decoders {

inline constexpr int kAdcMax = 4095;
inline constexpr int kAdcCenter = 2048;
inline constexpr double kAdcFullScaleVolts = 3.3;

/// 0..3.3 V to 0..4095 counts, rounding half away from zero.
/// Throws Error("OutOfRange") outside [0, 3.3].
int adc_map(double volts);

struct JoystickRaw {
  int x_counts = kAdcCenter;
  int y_counts = kAdcCenter;
  bool pressed = false;
};

struct JoystickReading {
  int joy_speed = 0;  // max(|cx|, |cy|)
  Direction direction = Direction::Stop;
  double speed = 0.0;  // min(1, joy_speed / 2047)
};

/// Dominant-axis decoding. y is forward/backward, x is left/right, ties go
/// to y. A pressed stick reports Stop with joy_speed 0.
JoystickReading decode_joystick(const JoystickRaw& raw);

/// Closed-vocabulary match after trimming and lowercasing.
std::optional<Direction> parse_voice(std::string_view text);

struct AccelSample {
  double ax = 0.0;  // g
  double ay = 0.0;
  double az = 1.0;
  Millis t = 0;

  double magnitude() const;
};

struct GestureConfig {
  double tilt_threshold_deg = 20.0;
};

struct Tilt {
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
};

Tilt tilt_of(const AccelSample& s);

/// Pitch beyond the threshold maps to Forward/Backward, roll to Right/Left.
/// Pitch wins when both exceed.
std::optional<Direction> decode_gesture(const AccelSample& sample, const GestureConfig& cfg = {});

enum class EogChannel { Horizontal, Vertical };

struct EogSample {
  Millis t = 0;
  double potential_mv = 0.0;
  EogChannel channel = EogChannel::Horizontal;
};

struct EogTrace {
  std::vector<EogSample> samples;
};

struct EogConfig {
  double mv_per_degree = 0.020;
  double angle_threshold_deg = 12.0;
  Millis dwell_ms = 4000;
  Millis filter_window_ms = 50;
  Millis min_history_ms = 200;
  double blink_threshold_mv = 0.3;
  Millis blink_min_width_ms = 50;
  Millis blink_max_width_ms = 400;
  Millis blink_pair_window_ms = 1000;
  double horizontal_baseline_mv = 0.0;
  double vertical_baseline_mv = 0.0;
};

struct BlinkEvent {
  Millis start = 0;
  Millis end = 0;
};

struct EogEvent {
  Millis t = 0;
  Direction direction = Direction::Stop;
};

struct EogReading {
  double angle_deg = 0.0;
  /// Most recent emitted command (direction dwell or double-blink Stop).
  std::optional<Direction> command;
  std::vector<EogEvent> events;
  std::vector<BlinkEvent> blinks;
};

/// Streaming EOG decoder. Samples must arrive in time order per channel.
/// Horizontal deflection maps to Right (+) / Left (-), vertical to
/// Forward (+) / Backward (-). A deflection held beyond the angle threshold
/// for the dwell time emits its direction once; two valid blinks on the
/// vertical channel within the pair window emit Stop.
class EogDecoder {
 public:
  explicit EogDecoder(EogConfig cfg = {});

  void push(const EogSample& sample);

  /// Current gaze angle from the filtered channels, in degrees.
  double angle_deg() const;
  /// Direction of the current dominant deflection, if any.
  std::optional<Direction> gaze_direction() const;

  /// Events emitted since the last call.
  std::vector<EogEvent> take_events();
  const std::vector<BlinkEvent>& blinks() const { return blinks_; }
  const std::vector<EogEvent>& all_events() const { return all_events_; }

  Millis horizontal_history_ms() const;

 private:
  struct Channel {
    std::deque<EogSample> window;
    double sum = 0.0;
    double filtered = 0.0;
    std::optional<Millis> first_t;
    std::optional<Millis> last_t;
  };

  void update_dwell(Millis t);
  void update_blink(Millis t, double filtered_mv);

  EogConfig cfg_;
  Channel horizontal_;
  Channel vertical_;
  std::optional<Direction> dwell_dir_;
  Millis dwell_start_ = 0;
  bool dwell_emitted_ = false;
  std::optional<Millis> pulse_start_;
  std::optional<Millis> pending_blink_start_;
  std::vector<BlinkEvent> blinks_;
  std::vector<EogEvent> pending_events_;
  std::vector<EogEvent> all_events_;
};

/// Replays `trace` up to and including `now` through a fresh decoder.
/// Throws Error("InsufficientHistory") with less than 200 ms of
/// horizontal-channel history.
EogReading decode_eog(const EogTrace& trace, Millis now, const EogConfig& cfg = {});

/// CSV with header `t_ms,channel,value`; channel is `horizontal`/`h` or
/// `vertical`/`v`.
EogTrace read_eog_csv(std::istream& in);
/// CSV with header `t_ms,channel,value`; channels ax, ay, az.
std::vector<AccelSample> read_accel_csv(std::istream& in);

struct VoiceCase {
  std::string utterance;
  std::optional<Direction> expected;
};

/// One utterance per line, a tab, then the expected label (`none` for no
/// command).
std::vector<VoiceCase> read_voice_corpus(std::istream& in);

}  // namespace wheelsim::decoders
