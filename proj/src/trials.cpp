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

#include <fstream>

#include "wheelsim/sim.hpp"

namespace wheelsim::sim {

namespace {

constexpr int kJoystickCounts = 1500;
constexpr double kTiltDeg = 30.0;
constexpr double kGazeDeg = 20.0;

Millis move_window(ModeId m) { return m == ModeId::EOG ? 5000 : 1000; }
Millis pre_window(ModeId m) { return m == ModeId::EOG ? 4500 : 1000; }
Millis stop_window(ModeId m) { return m == ModeId::EOG ? 1500 : 500; }

// Direction used to get the chair moving before a Stop attempt. EOG uses a
// horizontal gaze so the blink channel stays quiet.
Direction pre_direction(ModeId m) { return m == ModeId::EOG ? Direction::Right : Direction::Forward; }

decoders::JoystickRaw stick_for(Direction d) {
  decoders::JoystickRaw raw;
  switch (d) {
    case Direction::Forward: raw.y_counts += kJoystickCounts; break;
    case Direction::Backward: raw.y_counts -= kJoystickCounts; break;
    case Direction::Right: raw.x_counts += kJoystickCounts; break;
    case Direction::Left: raw.x_counts -= kJoystickCounts; break;
    case Direction::Stop: raw.pressed = true; break;
  }
  return raw;
}

std::pair<double, double> tilt_for(Direction d) {
  switch (d) {
    case Direction::Forward: return {kTiltDeg, 0.0};
    case Direction::Backward: return {-kTiltDeg, 0.0};
    case Direction::Right: return {0.0, kTiltDeg};
    case Direction::Left: return {0.0, -kTiltDeg};
    case Direction::Stop: break;
  }
  return {0.0, 0.0};
}

std::string garbage_word(Rng& rng) {
  const auto len = rng.uniform_int(3, 8);
  std::string w;
  for (std::int64_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng.uniform_int(0, 25)));
  return w;
}

// Feeds the modality's signal for `command`, either clean or corrupted.
void issue(InputModel& in, ModeId modality, Direction command, bool corrupted, Millis now,
           Rng& rng) {
  switch (modality) {
    case ModeId::Joystick:
      if (corrupted) {
        in.set_joystick({static_cast<int>(rng.uniform_int(0, 4095)),
                         static_cast<int>(rng.uniform_int(0, 4095)), false});
      } else {
        in.set_joystick(stick_for(command));
      }
      break;
    case ModeId::Voice:
      in.say(corrupted ? garbage_word(rng) : std::string(to_string(command)));
      break;
    case ModeId::Gesture:
      if (corrupted) {
        in.set_tilt(rng.uniform(-45.0, 45.0), rng.uniform(-45.0, 45.0));
      } else {
        const auto [pitch, roll] = tilt_for(command);
        in.set_tilt(pitch, roll);
      }
      break;
    case ModeId::EOG:
      if (command == Direction::Stop) {
        in.blink(now, 2, corrupted ? rng.uniform(0.0, 0.3) : 0.5);
      } else if (corrupted) {
        static constexpr std::array<Direction, 4> kDirs = {Direction::Forward, Direction::Backward,
                                                           Direction::Left, Direction::Right};
        in.set_gaze(kDirs[static_cast<std::size_t>(rng.uniform_int(0, 3))], rng.uniform(0.0, 30.0));
      } else {
        in.set_gaze(command, kGazeDeg);
      }
      break;
    case ModeId::Stop:
      break;
  }
}

bool run_one(ModeId modality, Direction command, bool corrupted, Rng& rng) {
  InputModel in;
  arbitration::ArbitrationState initial;
  initial.selected_policy = arbitration::ManualExclusive{modality};
  arbitration::ControlLoop loop({}, initial);
  arbitration::TickOutput last;
  auto run_until = [&](Millis end) {
    while (loop.now() < end) last = loop.step(in.sample(loop.now()));
  };

  Millis end = move_window(modality);
  if (command == Direction::Stop) {
    issue(in, modality, pre_direction(modality), false, 0, rng);
    run_until(pre_window(modality));
    if (last.mode != modality || last.command.direction != pre_direction(modality)) return false;
    issue(in, modality, Direction::Stop, corrupted, loop.now(), rng);
    end = loop.now() + stop_window(modality);
  } else {
    issue(in, modality, command, corrupted, 0, rng);
  }
  run_until(end);

  if (command == Direction::Stop) return last.command.direction == Direction::Stop;
  return last.mode == modality && last.command.direction == command;
}

}  // namespace

TrialCell run_trials(ModeId modality, Direction command, std::size_t n, double noise,
                     std::uint64_t seed) {
  if (n < 1) throw Error("InvalidArgument", "n must be at least 1");
  if (modality == ModeId::Stop) throw Error("InvalidArgument", "modality must be an input mode");
  if (!(noise >= 0.0 && noise <= 1.0)) throw Error("InvalidArgument", "noise must be in [0, 1]");
  Rng rng(seed);
  TrialCell cell;
  for (std::size_t i = 0; i < n; ++i) {
    const bool corrupted = noise > 0.0 && rng.bernoulli(noise);
    ++cell.trials;
    if (run_one(modality, command, corrupted, rng)) ++cell.successes;
  }
  return cell;
}

NoiseCell fit_noise_cell(ModeId modality, Direction command, std::size_t n, std::size_t target,
                         std::uint64_t max_seed) {
  if (target > n) throw Error("FitFailed", "target exceeds trial count");
  NoiseCell cell{modality, command, 0.0, 1, target};
  if (target == n) return cell;
  cell.noise = static_cast<double>(n - target) / static_cast<double>(n);
  for (std::uint64_t seed = 1; seed <= max_seed; ++seed) {
    if (run_trials(modality, command, n, cell.noise, seed).successes == target) {
      cell.seed = seed;
      return cell;
    }
  }
  throw Error("FitFailed", "no seed reproduces the target count");
}

TrialLog run_profile(const NoiseProfile& profile) {
  TrialLog log;
  for (const auto& c : profile.cells) {
    log[{c.modality, c.command}] = run_trials(c.modality, c.command, profile.trials, c.noise, c.seed);
  }
  return log;
}

NoiseProfile load_noise_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoFailure", "cannot open " + path.string());
  try {
    const json j = json::parse(in);
    NoiseProfile p;
    p.label = j.value("label", std::string());
    p.trials = j.at("trials").get<std::size_t>();
    for (const auto& c : j.at("cells")) {
      NoiseCell cell;
      cell.modality = c.at("modality").get<ModeId>();
      cell.command = c.at("command").get<Direction>();
      cell.noise = c.at("noise").get<double>();
      cell.seed = c.at("seed").get<std::uint64_t>();
      cell.expected = c.at("expected").get<std::size_t>();
      p.cells.push_back(cell);
    }
    return p;
  } catch (const json::exception& e) {
    throw Error("ParseError", path.string() + ": " + e.what());
  }
}

void save_noise_profile(const std::filesystem::path& path, const NoiseProfile& p) {
  json cells = json::array();
  for (const auto& c : p.cells) {
    cells.push_back({{"modality", c.modality},
                     {"command", c.command},
                     {"noise", c.noise},
                     {"seed", c.seed},
                     {"expected", c.expected}});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoFailure", "cannot write " + path.string());
  out << json{{"label", p.label}, {"trials", p.trials}, {"cells", cells}}.dump(2) << '\n';
}

}  // namespace wheelsim::sim
