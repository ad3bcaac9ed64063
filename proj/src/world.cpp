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

using calibration::VitalKind;

namespace {

constexpr Millis kAccelSampleMs = 10;
constexpr Millis kVitalsPeriodMs = 1000;
constexpr Millis kFreeFallMs = 300;
constexpr Millis kImpactMs = 60;
constexpr double kImpactG = 3.5;
constexpr std::array<VitalKind, 3> kVitalKinds = {VitalKind::HeartRate, VitalKind::SpO2,
                                                  VitalKind::Temperature};

[[noreturn]] void bad_event(const ScenarioEvent& e, const std::string& why) {
  throw Error("ScenarioParse",
              "event '" + e.type + "' at t=" + std::to_string(e.t_ms) + " ms: " + why);
}

Direction direction_param(const ScenarioEvent& e, const char* key) {
  const auto text = e.params.at(key).get<std::string>();
  if (text == "center" || text == "level") return Direction::Stop;
  const auto dir = parse_direction(text);
  if (!dir) bad_event(e, "unknown direction '" + text + "'");
  return *dir;
}

std::optional<Millis> until_param(const ScenarioEvent& e, Millis now) {
  if (!e.params.contains("hold_ms")) return std::nullopt;
  const auto hold = e.params.at("hold_ms").get<Millis>();
  if (hold <= 0) bad_event(e, "hold_ms must be positive");
  return now + hold;
}

VitalKind vital_param(const ScenarioEvent& e) {
  const auto kind = calibration::parse_vital_kind(e.params.at("kind").get<std::string>());
  if (!kind) bad_event(e, "kind must be hr, spo2 or temp");
  return *kind;
}

}  // namespace

World::World(WorldConfig cfg, FrameSink sink)
    : cfg_(std::move(cfg)),
      rng_(cfg_.seed),
      loop_(arbitration::LoopOptions{false, std::nullopt, cfg_.arbitration}),
      transport_([this](std::span<const std::uint8_t> frame) {
        if (sink_) sink_(frame, now_);
      }),
      uploader_(telemetry::FrameEncoder(cfg_.key, cfg_.device_id), transport_, cfg_.uploader),
      sink_(std::move(sink)),
      fall_detector_(cfg_.detectors.fall),
      convulsion_detector_(cfg_.detectors) {
  for (VitalKind kind : kVitalKinds) {
    profiles_[kind] = "resting";
    latest_[kind] = calibration::profile_value(kind, "resting", 0);
  }
  for (const auto& [kind, profile] : cfg_.profiles) {
    calibration::profile_value(kind, profile, 0);
    profiles_[kind] = profile;
  }
}

void World::log_event(json e) {
  e["t_ms"] = now_;
  event_log_.push_back(std::move(e));
}

bool World::hazard_active() const {
  const bool obstacle = obstacle_until_ && now_ < *obstacle_until_;
  return obstacle || vitals::detect_heart_attack(current_hr(), cfg_.detectors);
}

void World::clear_safe_halt() {
  arbitration::HazardFlags flags;
  flags.obstacle = obstacle_until_ && now_ < *obstacle_until_;
  flags.health = vitals::detect_heart_attack(current_hr(), cfg_.detectors);
  try {
    loop_.mutable_state() = arbitration::clear_safe_halt(loop_.state(), flags);
  } catch (const Error& e) {
    log_event({{"type", "clear_refused"}, {"reason", e.code()}});
    throw;
  }
  hazard_onset_.reset();
  log_event({{"type", "safe_halt_cleared"}});
}

void World::select_policy(const arbitration::ModePolicy& policy) {
  loop_.mutable_state() = arbitration::select_mode(loop_.state(), policy);
  log_event({{"type", "policy"}, {"policy", arbitration::policy_name(policy)}});
}

void World::apply(const ScenarioEvent& e) {
  const json& p = e.params;
  try {
    if (e.type == "joystick") {
      decoders::JoystickRaw raw;
      raw.pressed = p.value("pressed", false);
      if (p.contains("direction")) {
        const int c = p.value("counts", 1500);
        if (c < 0 || c > 2047) bad_event(e, "counts must be in 0..2047");
        switch (direction_param(e, "direction")) {
          case Direction::Forward: raw.y_counts += c; break;
          case Direction::Backward: raw.y_counts -= c; break;
          case Direction::Right: raw.x_counts += c; break;
          case Direction::Left: raw.x_counts -= c; break;
          case Direction::Stop: break;
        }
      } else {
        raw.x_counts += p.value("x", 0);
        raw.y_counts += p.value("y", 0);
      }
      if (raw.x_counts < 0 || raw.x_counts > 4095 || raw.y_counts < 0 || raw.y_counts > 4095) {
        bad_event(e, "joystick counts outside the ADC range");
      }
      inputs_.set_joystick(raw, until_param(e, now_));
    } else if (e.type == "voice") {
      inputs_.say(p.at("text").get<std::string>(), until_param(e, now_));
    } else if (e.type == "gesture") {
      if (p.contains("direction")) {
        const double tilt = p.value("tilt_deg", 30.0);
        double pitch = 0.0, roll = 0.0;
        switch (direction_param(e, "direction")) {
          case Direction::Forward: pitch = tilt; break;
          case Direction::Backward: pitch = -tilt; break;
          case Direction::Right: roll = tilt; break;
          case Direction::Left: roll = -tilt; break;
          case Direction::Stop: break;
        }
        inputs_.set_tilt(pitch, roll, until_param(e, now_));
      } else {
        inputs_.set_tilt(p.value("pitch_deg", 0.0), p.value("roll_deg", 0.0), until_param(e, now_));
      }
    } else if (e.type == "eog") {
      const Direction dir = direction_param(e, "direction");
      inputs_.set_gaze(dir, p.value("angle_deg", 20.0), until_param(e, now_));
    } else if (e.type == "blink") {
      inputs_.blink(now_, p.value("count", 2), p.value("amplitude_mv", 0.5),
                    p.value("width_ms", Millis{150}), p.value("gap_ms", Millis{300}));
    } else if (e.type == "hazard") {
      const auto kind = p.at("kind").get<std::string>();
      if (kind == "fall") {
        fall_script_ = Fall{now_};
        lying_ = false;
      } else if (kind == "obstacle") {
        obstacle_until_ = now_ + p.value("duration_ms", Millis{1000});
      } else {
        bad_event(e, "hazard kind must be fall or obstacle");
      }
    } else if (e.type == "physiology") {
      const VitalKind kind = vital_param(e);
      const auto profile = p.at("profile").get<std::string>();
      calibration::profile_value(kind, profile, 0);
      profiles_[kind] = profile;
    } else if (e.type == "convulsion") {
      convulsion_script_ = Convulsion{now_, now_ + p.value("duration_ms", Millis{8000}),
                                      p.value("freq_hz", 5.0), p.value("amplitude_g", 0.8)};
    } else if (e.type == "outage") {
      outage_until_ = now_ + p.at("duration_ms").get<Millis>();
    } else if (e.type == "mode") {
      const auto policy = arbitration::parse_policy(p.at("policy").get<std::string>());
      if (!policy) bad_event(e, "unknown policy");
      select_policy(*policy);
    } else if (e.type == "clear_safehalt") {
      try {
        clear_safe_halt();
      } catch (const Error& err) {
        if (err.code() != "HazardStillActive") throw;
      }
    } else {
      bad_event(e, "unknown event type");
    }
  } catch (const json::exception& ex) {
    bad_event(e, ex.what());
  } catch (const Error& ex) {
    if (ex.code() == "ScenarioParse") throw;
    bad_event(e, ex.code() + ": " + ex.what());
  }
  json logged = {{"type", e.type}, {"params", p}};
  log_event(std::move(logged));
}

void World::sample_vitals() {
  for (VitalKind kind : kVitalKinds) {
    const auto sensor = calibration::default_sensor(kind);
    const auto it = cfg_.noise.find(kind);
    const double sigma = it == cfg_.noise.end() ? 0.0 : it->second;
    const double truth = calibration::profile_value(kind, profiles_[kind], now_);
    const double raw = sensor.to_raw(truth + rng_.normal(0.0, sigma));
    const auto vital = calibration::calibrate(
        kind, sensor.truth, {calibration::channel_name(kind), now_, raw});
    latest_[kind] = vital.value;
    vitals_log_.push_back({vital, raw});
  }
}

void World::push_accel(Millis t) {
  Millis s = accel_fed_until_ ? *accel_fed_until_ + kAccelSampleMs : t;
  for (; s <= t; s += kAccelSampleMs) {
    decoders::AccelSample a{0.0, 0.0, 1.0, s};
    if (lying_) a = {1.0, 0.0, 0.0, s};
    if (fall_script_) {
      const Millis phase = s - fall_script_->start;
      if (phase < kFreeFallMs) {
        a = {0.05, 0.05, 0.05, s};
      } else if (phase < kFreeFallMs + kImpactMs) {
        a = {0.5, 0.3, kImpactG, s};
      } else {
        fall_script_.reset();
        lying_ = true;
        a = {1.0, 0.0, 0.0, s};
      }
    }
    if (convulsion_script_ && s >= convulsion_script_->start && s < convulsion_script_->end) {
      const double phase = 2.0 * std::numbers::pi * convulsion_script_->freq_hz *
                           static_cast<double>(s - convulsion_script_->start) / 1000.0;
      a.ax += 0.5 * convulsion_script_->amplitude_g * std::sin(phase);
    }
    a.ax += rng_.normal(0.0, cfg_.accel_noise_g);
    a.ay += rng_.normal(0.0, cfg_.accel_noise_g);
    a.az += rng_.normal(0.0, cfg_.accel_noise_g);

    if (fall_detector_.push(a)) {
      fall_pulse_ = true;
      fall_since_record_ = true;
      log_event({{"type", "fall_detected"}, {"sample_t", s}});
    }
    if (convulsion_detector_.push(a, latest_[VitalKind::HeartRate], latest_[VitalKind::SpO2])) {
      convulsion_pulse_ = true;
      convulsion_since_record_ = true;
      log_event({{"type", "convulsion_detected"}, {"sample_t", s}});
    }
    accel_fed_until_ = s;
  }
}

TickRecord World::tick() {
  const Millis t = now_;
  push_accel(t);
  const bool vitals_due = t % kVitalsPeriodMs == 0;
  if (vitals_due) sample_vitals();

  arbitration::ControlInputs in = inputs_.sample(t);
  in.fall_flag = fall_pulse_;
  in.health_alert =
      vitals::detect_heart_attack(latest_[VitalKind::HeartRate], cfg_.detectors) ||
      convulsion_pulse_;
  in.obstacle_flag = obstacle_until_ && t < *obstacle_until_;
  if (in.any_hazard() && !hazard_onset_) {
    hazard_onset_ = t;
    log_event({{"type", "hazard_onset"},
               {"fall", in.fall_flag},
               {"health", in.health_alert},
               {"obstacle", in.obstacle_flag}});
  }

  const arbitration::TickOutput out = loop_.step(in);
  pose_ = step_kinematics(pose_, out.command, arbitration::kTickMs / 1000.0, cfg_.kinematics);

  transport_.set_up(!(outage_until_ && t < *outage_until_));
  if (vitals_due) {
    telemetry::FeedRecord r;
    r.t = t;
    r.hr = latest_[VitalKind::HeartRate];
    r.spo2 = latest_[VitalKind::SpO2];
    r.temp = latest_[VitalKind::Temperature];
    r.fall = fall_since_record_ ? 1 : 0;
    r.convulsion = convulsion_since_record_ ? 1 : 0;
    r.mode = out.mode;
    r.pose = {pose_.x, pose_.y, pose_.heading};
    uploader_.offer(r);
    fall_since_record_ = false;
    convulsion_since_record_ = false;
  }
  uploader_.tick(t);

  fall_pulse_ = false;
  convulsion_pulse_ = false;
  now_ += arbitration::kTickMs;
  return {out, loop_.state().safe_halt, pose_};
}

}  // namespace wheelsim::sim
