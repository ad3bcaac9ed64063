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

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wheelsim/calibration.hpp"
#include "wheelsim/control_loop.hpp"
#include "wheelsim/decoders.hpp"
#include "wheelsim/monitor.hpp"
#include "wheelsim/rng.hpp"
#include "wheelsim/uploader.hpp"
#include "wheelsim/vitals.hpp"

namespace wheelsim::sim {

using arbitration::MotionCommand;

// ---------------------------------------------------------------------------
// Kinematics

struct KinematicConfig {
  double v_max = 1.0;      // m/s
  double omega_max = 1.0;  // rad/s
};

struct KinematicState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad, (-pi, pi]
  double v = 0.0;        // m/s, signed
  bool operator==(const KinematicState&) const = default;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double rad);

/// Throws Error("InvalidArgument") unless dt_s > 0.
KinematicState step_kinematics(KinematicState state, const MotionCommand& cmd, double dt_s,
                               const KinematicConfig& cfg = {});

// ---------------------------------------------------------------------------
// Input signal model, also used by the trial runner

/// Accelerometer sample (1 g total) for a given hand tilt.
decoders::AccelSample accel_from_tilt(double pitch_deg, double roll_deg, Millis t = 0);

/// Raw signals of the four modalities, turned into ControlInputs through the
/// real decoders every tick.
class InputModel {
 public:
  explicit InputModel(decoders::EogConfig eog = {});

  void set_joystick(decoders::JoystickRaw raw, std::optional<Millis> until = std::nullopt);
  /// Utterances that parse become the held voice command; others are ignored
  /// by the recognizer and clear voice_ready.
  void say(const std::string& utterance, std::optional<Millis> until = std::nullopt);
  void set_tilt(double pitch_deg, double roll_deg, std::optional<Millis> until = std::nullopt);
  void set_gaze(std::optional<Direction> dir, double angle_deg,
                std::optional<Millis> until = std::nullopt);
  void blink(Millis start, int count, double amplitude_mv = 0.5, Millis width_ms = 150,
             Millis gap_ms = 300);

  /// Decodes every modality at time t (EOG is fed at 100 Hz up to t).
  arbitration::ControlInputs sample(Millis t);

  const decoders::EogDecoder& eog() const { return eog_decoder_; }

 private:
  struct Blink {
    Millis start;
    Millis end;
    double amplitude_mv;
  };
  void expire(Millis t);
  double vertical_potential(Millis t) const;
  double horizontal_potential(Millis t) const;

  decoders::EogConfig eog_cfg_;
  decoders::JoystickRaw joystick_;
  std::optional<Millis> joystick_until_;
  std::optional<Direction> voice_command_;
  std::optional<Millis> voice_until_;
  std::optional<std::pair<double, double>> tilt_;
  std::optional<Millis> tilt_until_;
  std::optional<Direction> gaze_dir_;
  double gaze_angle_deg_ = 0.0;
  std::optional<Millis> gaze_until_;
  std::vector<Blink> blinks_;
  decoders::EogDecoder eog_decoder_;
  std::optional<Millis> eog_fed_until_;
  std::optional<Direction> eog_command_;
};

// ---------------------------------------------------------------------------
// Scenarios

struct ScenarioEvent {
  Millis t_ms = 0;
  std::string type;
  json params = json::object();
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  Millis duration_ms = 0;
  std::vector<ScenarioEvent> events;  // sorted by t_ms (stable)
  json config = json::object();
};

/// Throws Error("ScenarioParse").
Scenario parse_scenario(const json& j, std::string name = {});
Scenario load_scenario(const std::filesystem::path& path);

struct WorldConfig {
  std::uint64_t seed = 1;
  KinematicConfig kinematics;
  vitals::DetectorConfig detectors;
  std::uint64_t device_id = 1;
  telemetry::Key key{};
  telemetry::UploaderConfig uploader;
  std::map<calibration::VitalKind, std::string> profiles;
  std::map<calibration::VitalKind, double> noise;
  double accel_noise_g = 0.01;
  Millis time_base_ms = 1767225600000;  // 2026-01-01T00:00:00Z
  arbitration::ArbitrationConfig arbitration;
};

/// Applies a scenario's `config` object over the defaults. Throws
/// Error("ScenarioParse").
WorldConfig world_config_from(const Scenario& s);

/// Hex key used when a scenario does not specify one.
telemetry::Key default_key();

struct TickRecord {
  arbitration::TickOutput out;
  bool safe_halt = false;
  KinematicState pose;
};

struct VitalRecord {
  calibration::CalibratedVital vital;
  double raw = 0.0;
};

/// Everything on the chair side of the uplink. Not thread-safe; the live
/// session serializes access.
class World {
 public:
  using FrameSink = std::function<void(std::span<const std::uint8_t>, Millis now)>;

  World(WorldConfig cfg, FrameSink sink);

  /// Applies an event at the current time. Throws Error("ScenarioParse") on
  /// bad parameters.
  void apply(const ScenarioEvent& e);
  /// Advances one 20 ms tick.
  TickRecord tick();

  Millis now() const { return now_; }
  const arbitration::ArbitrationState& arbitration_state() const { return loop_.state(); }
  const KinematicState& pose() const { return pose_; }
  InputModel& inputs() { return inputs_; }
  telemetry::UploaderMetrics uploader_metrics() const { return uploader_.metrics(); }
  const std::vector<VitalRecord>& vitals_log() const { return vitals_log_; }
  const std::vector<json>& event_log() const { return event_log_; }
  std::optional<Millis> hazard_onset() const { return hazard_onset_; }
  bool hazard_active() const;
  double current_hr() const { return latest_.at(calibration::VitalKind::HeartRate); }

  /// Throws Error("HazardStillActive").
  void clear_safe_halt();
  void select_policy(const arbitration::ModePolicy& policy);

 private:
  void sample_vitals();
  void push_accel(Millis t);
  void log_event(json e);

  WorldConfig cfg_;
  Rng rng_;
  InputModel inputs_;
  arbitration::ControlLoop loop_;
  KinematicState pose_;
  Millis now_ = 0;

  telemetry::LoopbackTransport transport_;
  telemetry::Uploader uploader_;
  FrameSink sink_;

  std::map<calibration::VitalKind, std::string> profiles_;
  std::map<calibration::VitalKind, double> latest_;
  std::vector<VitalRecord> vitals_log_;

  vitals::FallDetector fall_detector_;
  vitals::ConvulsionDetector convulsion_detector_;
  std::optional<Millis> accel_fed_until_;
  struct Fall {
    Millis start;
  };
  std::optional<Fall> fall_script_;
  bool lying_ = false;
  struct Convulsion {
    Millis start, end;
    double freq_hz, amplitude_g;
  };
  std::optional<Convulsion> convulsion_script_;
  bool fall_since_record_ = false;
  bool convulsion_since_record_ = false;
  bool fall_pulse_ = false;
  bool convulsion_pulse_ = false;
  std::optional<Millis> obstacle_until_;
  std::optional<Millis> outage_until_;
  std::optional<Millis> hazard_onset_;

  std::vector<json> event_log_;
};

struct RunOptions {
  bool realtime = false;
};

struct RunResult {
  json metrics;
  std::vector<TickRecord> timeline;
  std::vector<monitor::AlertRecord> alerts;
};

/// Runs the whole stack over simulated time and writes timeline.jsonl,
/// pose.jsonl, vitals.jsonl, events.jsonl, alerts.jsonl, metrics.json plus the
/// service's store/ and outbox/ directories into `out_dir`.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                       const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Trials

struct TrialCell {
  std::size_t trials = 0;
  std::size_t successes = 0;
  bool operator==(const TrialCell&) const = default;
};

/// Keyed by (modality, command).
using TrialLog = std::map<std::pair<ModeId, Direction>, TrialCell>;

/// Runs n scripted command attempts through the decoders and arbitration.
/// Each attempt is corrupted at the decoder input with probability `noise`.
TrialCell run_trials(ModeId modality, Direction command, std::size_t n, double noise,
                     std::uint64_t seed);

struct NoiseCell {
  ModeId modality = ModeId::Joystick;
  Direction command = Direction::Stop;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::size_t expected = 0;
};

struct NoiseProfile {
  std::string label;
  std::size_t trials = 100;
  std::vector<NoiseCell> cells;
};

NoiseProfile load_noise_profile(const std::filesystem::path& path);
void save_noise_profile(const std::filesystem::path& path, const NoiseProfile& p);

/// Searches, per cell, the first seed whose run yields exactly `target`
/// successes out of `n`. Throws Error("FitFailed") if none is found.
NoiseCell fit_noise_cell(ModeId modality, Direction command, std::size_t n, std::size_t target,
                         std::uint64_t max_seed = 100000);

/// Runs every cell of a noise profile.
TrialLog run_profile(const NoiseProfile& profile);

inline constexpr std::array<Direction, 5> kTrialCommands = {
    Direction::Right, Direction::Left, Direction::Forward, Direction::Backward, Direction::Stop};
inline constexpr std::array<ModeId, 4> kTrialModalities = {ModeId::Gesture, ModeId::Voice,
                                                           ModeId::EOG, ModeId::Joystick};

// ---------------------------------------------------------------------------
// Live session for the serve command

/// Runs a World in real time against a monitor service and exposes it as the
/// service's drive console.
class LiveSession : public monitor::DriveConsole {
 public:
  LiveSession(WorldConfig cfg, monitor::MonitorService& service);
  ~LiveSession() override;

  void start();
  void stop();

  json drive(const json& intent) override;
  json set_mode(const json& request) override;
  json clear_safe_halt() override;

  json snapshot() const;

 private:
  void run(std::stop_token stop);
  json state_locked() const;

  monitor::MonitorService& service_;
  mutable std::mutex mu_;
  std::unique_ptr<World> world_;
  TickRecord last_;
  std::jthread thread_;
};

}  // namespace wheelsim::sim
