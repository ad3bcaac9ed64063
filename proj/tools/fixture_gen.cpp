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

#include "fixture_gen.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include "wheelsim/calibration.hpp"
#include "wheelsim/csv.hpp"
#include "wheelsim/rng.hpp"
#include "wheelsim/sim.hpp"
#include "wheelsim/telemetry.hpp"
#include "wheelsim/vitals.hpp"

namespace wheelsim::tools {

namespace fs = std::filesystem;
using calibration::VitalKind;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Millis kAccelStepMs = 10;

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoFailure", "cannot write " + p.string());
  return out;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// --- calibration pairs ------------------------------------------------------

void write_pairs(const fs::path& dir, VitalKind kind, const std::string& profile, double sigma,
                 double ref_step, double module_step, std::uint64_t seed) {
  const auto sensor = calibration::default_sensor(kind);
  Rng rng(seed);
  auto out = open_out(dir / (calibration::channel_name(kind) + ".csv"));
  out << "# synthetic paired readings: module = calibrated simulated sensor, reference = "
         "rounded true value\n";
  out << "module,reference\n";
  for (int i = 0; i < 60; ++i) {
    const Millis t = i * 7919;
    const double truth = calibration::profile_value(kind, profile, t) + rng.normal(0.0, 0.3 * sigma);
    const double raw = sensor.to_raw(truth + rng.normal(0.0, sigma));
    const auto vital =
        calibration::calibrate(kind, sensor.truth, {calibration::channel_name(kind), t, raw});
    out << format_number(round_to(vital.value, module_step)) << ","
        << format_number(round_to(truth, ref_step)) << "\n";
  }
}

// --- detector corpus --------------------------------------------------------

struct Trace {
  std::string name;
  std::string label;
  double hr = 75.0;
  double spo2 = 98.0;
  std::string note;
  std::vector<decoders::AccelSample> samples;
};

using Shaper = std::function<decoders::AccelSample(Millis t, Rng& rng)>;

Trace make_trace(std::string name, std::string label, double hr, std::string note, Millis length_ms,
                 double noise_g, std::uint64_t seed, const Shaper& shape) {
  Trace tr{std::move(name), std::move(label), hr, 98.0, std::move(note), {}};
  Rng rng(seed);
  for (Millis t = 0; t < length_ms; t += kAccelStepMs) {
    auto s = shape(t, rng);
    s.t = t;
    s.ax += rng.normal(0.0, noise_g);
    s.ay += rng.normal(0.0, noise_g);
    s.az += rng.normal(0.0, noise_g);
    tr.samples.push_back(s);
  }
  return tr;
}

decoders::AccelSample seated() { return {0.0, 0.0, 1.0, 0}; }

decoders::AccelSample walking(Millis t, double cadence_hz, double amp_g) {
  const double s = static_cast<double>(t) / 1000.0;
  return {0.08 * std::sin(kTwoPi * cadence_hz / 2.0 * s), 0.0,
          1.0 + amp_g * std::sin(kTwoPi * cadence_hz * s), 0};
}

std::vector<Trace> build_corpus() {
  std::vector<Trace> corpus;
  std::uint64_t seed = 1000;

  for (int i = 0; i < 22; ++i) {
    Rng p(++seed);
    const Millis onset = 3000 + 100 * p.uniform_int(0, 20);
    const Millis ff = 150 + 10 * p.uniform_int(0, 25);
    const Millis gap = 10 * p.uniform_int(0, 15);
    const Millis impact = 30 + 10 * p.uniform_int(0, 5);
    const double peak = p.uniform(2.8, 4.5);
    const double ff_level = p.uniform(0.05, 0.18);
    const bool walking_before = i % 2 == 1;
    corpus.push_back(make_trace(
        "fall_" + std::to_string(i + 1), "fall", 80.0 + i,
        "free fall " + std::to_string(ff) + " ms, impact " + format_number(round_to(peak, 0.01)) + " g" +
            (walking_before ? " after walking" : " from seated"),
        12000, 0.02, seed * 7, [=](Millis t, Rng&) {
          if (t < onset) return walking_before ? walking(t, 1.8, 0.15) : seated();
          if (t < onset + ff) return decoders::AccelSample{ff_level, 0.0, 0.0, 0};
          if (t < onset + ff + gap) return decoders::AccelSample{0.4, 0.2, 0.4, 0};
          if (t < onset + ff + gap + impact) return decoders::AccelSample{0.6, 0.4, peak, 0};
          return decoders::AccelSample{1.0, 0.0, 0.05, 0};
        }));
  }

  for (int i = 0; i < 12; ++i) {
    Rng p(++seed);
    const double f = p.uniform(3.0, 7.0);
    const double amp = p.uniform(0.6, 1.2);
    const Millis start = 1500 + 100 * p.uniform_int(0, 10);
    const Millis dur = 7000 + 100 * p.uniform_int(0, 20);
    const double hr = p.uniform(110.0, 135.0);
    corpus.push_back(make_trace(
        "convulsion_" + std::to_string(i + 1), "convulsion", std::round(hr),
        format_number(round_to(f, 0.01)) + " Hz, " + format_number(round_to(amp, 0.01)) +
            " g peak-to-peak for " + std::to_string(dur) + " ms",
        12000, 0.02, seed * 7, [=](Millis t, Rng&) {
          auto s = seated();
          if (t >= start && t < start + dur) {
            s.ax += 0.5 * amp * std::sin(kTwoPi * f * static_cast<double>(t - start) / 1000.0);
          }
          return s;
        }));
  }

  int neg = 0;
  auto negative = [&](const std::string& note, double hr, double noise, const Shaper& shape) {
    ++neg;
    corpus.push_back(make_trace("negative_" + std::to_string(neg), "negative", hr, note, 12000,
                                noise, ++seed * 7, shape));
  };
  for (int i = 0; i < 6; ++i) {
    negative("seated rest", 70.0 + i, 0.01 + 0.005 * i, [](Millis, Rng&) { return seated(); });
  }
  for (int i = 0; i < 6; ++i) {
    const double cadence = 1.6 + 0.08 * i;
    negative("walking at " + format_number(round_to(cadence, 0.01)) + " Hz", 95.0, 0.03,
             [=](Millis t, Rng&) { return walking(t, cadence, 0.18); });
  }
  for (int i = 0; i < 6; ++i) {
    const double amp = 0.2 + 0.04 * i;
    negative("0.5 Hz postural sway", 72.0, 0.02, [=](Millis t, Rng&) {
      auto s = seated();
      s.ax += amp * std::sin(kTwoPi * 0.5 * static_cast<double>(t) / 1000.0);
      return s;
    });
  }
  for (int i = 0; i < 3; ++i) {
    const Millis at = 4000 + 500 * i;
    negative("hard sit-down, impact without free fall", 85.0, 0.02, [=](Millis t, Rng&) {
      auto s = seated();
      if (t >= at && t < at + 50) s.az = 2.2;
      return s;
    });
  }
  for (int i = 0; i < 3; ++i) {
    const Millis at = 5000 + 300 * i;
    negative("brief 80 ms drop then bump", 80.0, 0.02, [=](Millis t, Rng&) {
      auto s = seated();
      if (t >= at && t < at + 80) s = {0.1, 0.0, 0.1, 0};
      if (t >= at + 80 && t < at + 120) s.az = 3.0;
      return s;
    });
  }
  for (int i = 0; i < 3; ++i) {
    const double f = 4.0 + i;
    negative("rhythmic shaking with normal heart rate", 82.0, 0.02, [=](Millis t, Rng&) {
      auto s = seated();
      if (t >= 2000 && t < 10000) s.ax += 0.45 * std::sin(kTwoPi * f * static_cast<double>(t) / 1000.0);
      return s;
    });
  }
  for (int i = 0; i < 3; ++i) {
    const double f = 11.0 + 2 * i;
    negative("motor vibration above the seizure band", 120.0, 0.01, [=](Millis t, Rng&) {
      auto s = seated();
      s.ax += 0.4 * std::sin(kTwoPi * f * static_cast<double>(t) / 1000.0);
      return s;
    });
  }
  for (int i = 0; i < 3; ++i) {
    negative("low-amplitude tremor", 115.0, 0.01, [=](Millis t, Rng&) {
      auto s = seated();
      s.ax += 0.12 * std::sin(kTwoPi * (5.0 + i) * static_cast<double>(t) / 1000.0);
      return s;
    });
  }
  return corpus;
}

void write_corpus(const fs::path& dir) {
  const auto corpus = build_corpus();
  json manifest = {{"label", "synthetic accelerometer traces, 100 Hz, units g"},
                   {"traces", json::array()}};
  for (const auto& tr : corpus) {
    auto out = open_out(dir / (tr.name + ".csv"));
    out << "t_ms,channel,value\n";
    for (const auto& s : tr.samples) {
      out << s.t << ",ax," << format_number(round_to(s.ax, 1e-4)) << "\n";
      out << s.t << ",ay," << format_number(round_to(s.ay, 1e-4)) << "\n";
      out << s.t << ",az," << format_number(round_to(s.az, 1e-4)) << "\n";
    }
    manifest["traces"].push_back({{"file", tr.name + ".csv"},
                                  {"label", tr.label},
                                  {"hr", tr.hr},
                                  {"spo2", tr.spo2},
                                  {"note", tr.note}});
  }
  open_out(dir / "manifest.json") << manifest.dump(2) << "\n";
}

// --- voice corpus -----------------------------------------------------------

void write_voice(const fs::path& dir) {
  auto out = open_out(dir / "corpus.tsv");
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"forward", "forward"},     {"Forward", "forward"},       {"  FORWARD  ", "forward"},
      {"backward", "backward"},   {"Backward", "backward"},     {"left", "left"},
      {"LEFT", "left"},           {" left", "left"},            {"right", "right"},
      {"Right ", "right"},        {"stop", "stop"},             {"STOP", "stop"},
      {"Stop\t", "stop"},         {"go forward", "none"},       {"backwards", "none"},
      {"lefty", "none"},          {"rite", "none"},             {"stopp", "none"},
      {"", "none"},               {"   ", "none"},              {"forward please", "none"},
      {"halt", "none"},           {"turn left", "none"},        {"righteous", "none"},
      {"for ward", "none"},
  };
  for (const auto& [utterance, label] : rows) {
    std::string escaped = utterance;
    for (auto& c : escaped) {
      if (c == '\t') c = ' ';
    }
    out << escaped << "\t" << label << "\n";
  }
}

// --- frame vectors ----------------------------------------------------------

void write_kat(const fs::path& dir) {
  const auto key = sim::default_key();
  struct Vec {
    std::uint64_t device;
    std::uint32_t seq;
    telemetry::FeedRecord record;
  };
  const std::vector<Vec> vecs = {
      {1, 1, {0, 72.0, 98.0, 36.8, 0, 0, ModeId::Stop, {0.0, 0.0, 0.0}}},
      {1, 2, {1000, 150.5, 97.25, 37.1, 0, 0, ModeId::Joystick, {1.5, -0.25, 0.5}}},
      {0x0123456789abcdefULL, 4294967295u,
       {86400000, 38.0, 88.0, 35.0, 1, 1, ModeId::EOG, {-12.125, 3.0, -3.0}}},
  };
  json out = json::array();
  for (const auto& v : vecs) {
    const auto frame = telemetry::encode_frame(v.record, key, v.device, v.seq);
    out.push_back({{"key", telemetry::to_hex(key)},
                   {"device_id", v.device},
                   {"seq", v.seq},
                   {"record", v.record},
                   {"payload", telemetry::canonical_payload(v.record)},
                   {"frame_hex", telemetry::to_hex(frame)}});
  }
  open_out(dir / "frames.json") << out.dump(2) << "\n";
}

}  // namespace

void generate_fixtures(const fs::path& dir) {
  for (VitalKind kind : {VitalKind::HeartRate, VitalKind::SpO2, VitalKind::Temperature}) {
    fs::create_directories(dir / "calibration");
    calibration::save_calibration(dir / "calibration" / (calibration::channel_name(kind) + ".json"),
                                  calibration::default_sensor(kind).truth);
  }
  write_pairs(dir / "pairs", VitalKind::HeartRate, "paper-range", 0.8, 1.0, 0.1, 11);
  write_pairs(dir / "pairs", VitalKind::SpO2, "cohort", 0.5, 1.0, 0.1, 12);
  write_pairs(dir / "pairs", VitalKind::Temperature, "cohort", 0.2, 0.1, 0.01, 13);
  write_corpus(dir / "corpus");
  write_voice(dir / "voice");
  write_kat(dir / "kat");
  open_out(dir / "keys" / "demo.key") << telemetry::to_hex(sim::default_key()) << "\n";
  open_out(dir / "detectors.json") << json(vitals::DetectorConfig{}).dump(2) << "\n";
}

}  // namespace wheelsim::tools
