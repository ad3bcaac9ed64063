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

#include <cmath>
#include <numbers>

#include "wheelsim/sim.hpp"

namespace wheelsim::sim {

namespace {
constexpr Millis kEogSampleMs = 10;
constexpr double kDegToRad = std::numbers::pi / 180.0;
}  // namespace

double normalize_angle(double rad) {
  double a = std::remainder(rad, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

KinematicState step_kinematics(KinematicState s, const MotionCommand& cmd, double dt_s,
                               const KinematicConfig& cfg) {
  if (!(dt_s > 0.0)) throw Error("InvalidArgument", "dt must be positive");
  const double speed = std::clamp(cmd.speed, 0.0, 1.0);
  s.v = 0.0;
  switch (cmd.direction) {
    case Direction::Forward:
    case Direction::Backward: {
      s.v = (cmd.direction == Direction::Forward ? 1.0 : -1.0) * cfg.v_max * speed;
      s.x += s.v * std::cos(s.heading) * dt_s;
      s.y += s.v * std::sin(s.heading) * dt_s;
      break;
    }
    case Direction::Left:
      s.heading = normalize_angle(s.heading + cfg.omega_max * speed * dt_s);
      break;
    case Direction::Right:
      s.heading = normalize_angle(s.heading - cfg.omega_max * speed * dt_s);
      break;
    case Direction::Stop:
      break;
  }
  return s;
}

decoders::AccelSample accel_from_tilt(double pitch_deg, double roll_deg, Millis t) {
  const double p = pitch_deg * kDegToRad;
  const double r = roll_deg * kDegToRad;
  const double ax = -std::sin(p) * std::cos(r);
  const double ay = std::sin(r) * std::cos(p);
  const double az = std::cos(p) * std::cos(r);
  const double norm = std::sqrt(ax * ax + ay * ay + az * az);
  return {ax / norm, ay / norm, az / norm, t};
}

InputModel::InputModel(decoders::EogConfig eog) : eog_cfg_(eog), eog_decoder_(eog) {}

void InputModel::set_joystick(decoders::JoystickRaw raw, std::optional<Millis> until) {
  joystick_ = raw;
  joystick_until_ = until;
}

void InputModel::say(const std::string& utterance, std::optional<Millis> until) {
  voice_command_ = decoders::parse_voice(utterance);
  voice_until_ = voice_command_ ? until : std::nullopt;
}

void InputModel::set_tilt(double pitch_deg, double roll_deg, std::optional<Millis> until) {
  tilt_ = {pitch_deg, roll_deg};
  tilt_until_ = until;
}

void InputModel::set_gaze(std::optional<Direction> dir, double angle_deg,
                          std::optional<Millis> until) {
  gaze_dir_ = dir == Direction::Stop ? std::nullopt : dir;
  gaze_angle_deg_ = gaze_dir_ ? angle_deg : 0.0;
  gaze_until_ = gaze_dir_ ? until : std::nullopt;
}

void InputModel::blink(Millis start, int count, double amplitude_mv, Millis width_ms,
                       Millis gap_ms) {
  for (int i = 0; i < count; ++i) {
    const Millis s = start + i * (width_ms + gap_ms);
    blinks_.push_back({s, s + width_ms, amplitude_mv});
  }
}

void InputModel::expire(Millis t) {
  if (joystick_until_ && t >= *joystick_until_) {
    joystick_ = {};
    joystick_until_.reset();
  }
  if (voice_until_ && t >= *voice_until_) {
    voice_command_.reset();
    voice_until_.reset();
  }
  if (tilt_until_ && t >= *tilt_until_) {
    tilt_.reset();
    tilt_until_.reset();
  }
  if (gaze_until_ && t >= *gaze_until_) set_gaze(std::nullopt, 0.0);
}

double InputModel::horizontal_potential(Millis) const {
  double mv = eog_cfg_.horizontal_baseline_mv;
  if (gaze_dir_ == Direction::Right) mv += gaze_angle_deg_ * eog_cfg_.mv_per_degree;
  if (gaze_dir_ == Direction::Left) mv -= gaze_angle_deg_ * eog_cfg_.mv_per_degree;
  return mv;
}

double InputModel::vertical_potential(Millis t) const {
  double mv = eog_cfg_.vertical_baseline_mv;
  if (gaze_dir_ == Direction::Forward) mv += gaze_angle_deg_ * eog_cfg_.mv_per_degree;
  if (gaze_dir_ == Direction::Backward) mv -= gaze_angle_deg_ * eog_cfg_.mv_per_degree;
  for (const auto& b : blinks_) {
    if (t >= b.start && t < b.end) mv += b.amplitude_mv;
  }
  return mv;
}

arbitration::ControlInputs InputModel::sample(Millis t) {
  expire(t);

  Millis s = eog_fed_until_ ? *eog_fed_until_ + kEogSampleMs : t;
  for (; s <= t; s += kEogSampleMs) {
    eog_decoder_.push({s, horizontal_potential(s), decoders::EogChannel::Horizontal});
    eog_decoder_.push({s, vertical_potential(s), decoders::EogChannel::Vertical});
    eog_fed_until_ = s;
  }
  std::erase_if(blinks_, [&](const Blink& b) { return b.end + 1000 < t; });
  for (const auto& e : eog_decoder_.take_events()) eog_command_ = e.direction;
  if (!eog_decoder_.gaze_direction()) eog_command_.reset();

  arbitration::ControlInputs in;
  in.timestamp = t;
  const auto joy = decoders::decode_joystick(joystick_);
  in.joy_pressed = joystick_.pressed;
  in.joy_speed = joy.joy_speed;
  if (joy.direction != Direction::Stop) in.joy_command = joy.direction;

  in.voice_ready = voice_command_.has_value();
  in.voice_command = voice_command_;

  if (tilt_) {
    in.gesture_command = decoders::decode_gesture(accel_from_tilt(tilt_->first, tilt_->second, t));
    in.gesture_ok = in.gesture_command.has_value();
  }

  in.eog_angle = eog_decoder_.angle_deg();
  in.eog_command = eog_command_;
  return in;
}

}  // namespace wheelsim::sim
