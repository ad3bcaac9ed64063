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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "wheelsim/sim.hpp"

namespace wheelsim::sim {

namespace fs = std::filesystem;
using calibration::VitalKind;

namespace {

const std::set<std::string> kEventTypes = {
    "joystick", "voice",      "gesture", "eog",  "blink",         "hazard",
    "physiology", "convulsion", "outage",  "mode", "clear_safehalt"};

[[noreturn]] void parse_error(const std::string& why) { throw Error("ScenarioParse", why); }

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoFailure", "cannot write " + path.string());
  for (const auto& l : lines) out << l.dump() << '\n';
}

}  // namespace

telemetry::Key default_key() {
  return telemetry::parse_key_hex("000102030405060708090a0b0c0d0e0f");
}

Scenario parse_scenario(const json& j, std::string name) {
  Scenario s;
  s.name = std::move(name);
  try {
    if (!j.is_object()) parse_error("scenario must be a JSON object");
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", std::uint64_t{1});
    s.duration_ms = j.at("duration_ms").get<Millis>();
    if (s.duration_ms <= 0) parse_error("duration_ms must be positive");
    s.config = j.value("config", json::object());
    if (!s.config.is_object()) parse_error("config must be an object");
    for (const auto& ev : j.value("events", json::array())) {
      ScenarioEvent e;
      e.t_ms = ev.at("t_ms").get<Millis>();
      e.type = ev.at("type").get<std::string>();
      e.params = ev.value("params", json::object());
      if (!kEventTypes.count(e.type)) parse_error("unknown event type '" + e.type + "'");
      if (e.t_ms < 0 || e.t_ms >= s.duration_ms) {
        parse_error("event '" + e.type + "' at t=" + std::to_string(e.t_ms) +
                    " ms lies outside the scenario duration");
      }
      s.events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t_ms < b.t_ms; });
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("ScenarioParse", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("ScenarioParse", path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.stem().string());
}

WorldConfig world_config_from(const Scenario& s) {
  WorldConfig w;
  w.seed = s.seed;
  w.key = default_key();
  w.noise = {{VitalKind::HeartRate, 0.8}, {VitalKind::SpO2, 0.5}, {VitalKind::Temperature, 0.2}};
  const json& c = s.config;
  try {
    w.kinematics.v_max = c.value("v_max", w.kinematics.v_max);
    w.kinematics.omega_max = c.value("omega_max", w.kinematics.omega_max);
    w.device_id = c.value("device_id", w.device_id);
    if (c.contains("key_hex")) w.key = telemetry::parse_key_hex(c.at("key_hex").get<std::string>());
    if (c.contains("uploader")) {
      const json& u = c.at("uploader");
      if (u.value("batch", false)) w.uploader = telemetry::UploaderConfig::batch_preset();
      w.uploader.cadence_ms = u.value("cadence_ms", w.uploader.cadence_ms);
      w.uploader.capacity = u.value("capacity", w.uploader.capacity);
    }
    if (c.contains("detectors")) w.detectors = c.at("detectors").get<vitals::DetectorConfig>();
    for (const char* section : {"profiles", "noise"}) {
      if (!c.contains(section)) continue;
      for (const auto& [key, value] : c.at(section).items()) {
        const auto kind = calibration::parse_vital_kind(key);
        if (!kind) parse_error(std::string(section) + ": unknown vital '" + key + "'");
        if (std::string(section) == "profiles") {
          w.profiles[*kind] = value.get<std::string>();
        } else {
          w.noise[*kind] = value.get<double>();
        }
      }
    }
    w.accel_noise_g = c.value("accel_noise_g", w.accel_noise_g);
    w.time_base_ms = c.value("time_base_ms", w.time_base_ms);
    w.arbitration.discrete_speed = c.value("discrete_speed", w.arbitration.discrete_speed);
  } catch (const json::exception& e) {
    parse_error(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == "ScenarioParse") throw;
    parse_error("config: " + e.code() + ": " + e.what());
  }
  if (!(w.kinematics.v_max > 0.0) || !(w.kinematics.omega_max > 0.0)) {
    parse_error("config: v_max and omega_max must be positive");
  }
  return w;
}

RunResult run_scenario(const Scenario& scenario, const fs::path& out_dir,
                       const RunOptions& options) {
  const WorldConfig wcfg = world_config_from(scenario);

  fs::create_directories(out_dir);
  for (const char* stale : {"store", "outbox"}) fs::remove_all(out_dir / stale);

  Millis sim_now = 0;
  monitor::ServiceConfig scfg;
  scfg.key = wcfg.key;
  scfg.detectors = wcfg.detectors;
  scfg.data_dir = out_dir / "store";
  scfg.outbox_dir = out_dir / "outbox";
  scfg.async_webhook = false;
  scfg.time_base_ms = wcfg.time_base_ms;
  scfg.clock = [&] { return wcfg.time_base_ms + sim_now; };
  monitor::MonitorService service(scfg);
  service.register_patient(telemetry::patient_id_for(wcfg.device_id));

  struct Arrival {
    std::string id;
    std::string kind;
    Millis record_t;
    Millis ingest_t;
  };
  std::vector<Arrival> arrivals;
  std::vector<Millis> injections;

  World world(wcfg, [&](std::span<const std::uint8_t> frame, Millis now) {
    const auto result = service.ingest(frame);
    for (const auto& a : result.alerts) {
      arrivals.push_back({a.id, std::string(vitals::to_string(a.kind)), a.t, now});
    }
  });

  RunResult result;
  std::vector<json> timeline, poses;
  std::map<std::string, std::size_t> mode_ticks;
  std::size_t latch_violations = 0;
  double max_step = 0.0;

  using Clock = std::chrono::steady_clock;
  const auto wall_start = Clock::now();
  std::size_t next_event = 0;
  while (world.now() < scenario.duration_ms) {
    sim_now = world.now();
    while (next_event < scenario.events.size() &&
           scenario.events[next_event].t_ms <= world.now()) {
      const auto& e = scenario.events[next_event++];
      if (e.type == "physiology" || e.type == "hazard" || e.type == "convulsion") {
        injections.push_back(world.now());
      }
      world.apply(e);
    }
    if (options.realtime) {
      std::this_thread::sleep_until(wall_start + std::chrono::milliseconds(world.now()));
    }
    const KinematicState before = world.pose();
    const TickRecord rec = world.tick();

    const double step = std::hypot(rec.pose.x - before.x, rec.pose.y - before.y);
    max_step = std::max(max_step, step);
    if (world.hazard_onset() && rec.out.mode != ModeId::Stop) ++latch_violations;
    ++mode_ticks[std::string(to_string(rec.out.mode))];

    json line = rec.out;
    line["safe_halt"] = rec.safe_halt;
    timeline.push_back(std::move(line));
    poses.push_back({{"t_ms", rec.out.t_ms},
                     {"x", rec.pose.x},
                     {"y", rec.pose.y},
                     {"heading", rec.pose.heading},
                     {"v", rec.pose.v}});
    result.timeline.push_back(rec);
  }

  std::vector<json> vitals_lines;
  for (const auto& v : world.vitals_log()) {
    vitals_lines.push_back({{"t_ms", v.vital.t},
                            {"kind", calibration::channel_name(v.vital.kind)},
                            {"raw", v.raw},
                            {"value", v.vital.value},
                            {"quality", v.vital.quality == calibration::Quality::Ok ? "ok" : "suspect"}});
  }

  result.alerts = service.alerts(false);
  std::vector<json> alert_lines;
  std::map<std::string, std::size_t> alert_counts;
  for (const auto& a : result.alerts) {
    json j = a.event;
    j["acknowledged"] = a.acknowledged;
    alert_lines.push_back(std::move(j));
    ++alert_counts[std::string(vitals::to_string(a.event.kind))];
  }

  json latencies = json::array();
  for (const auto& a : arrivals) {
    std::optional<Millis> injected;
    for (Millis t : injections) {
      if (t <= a.ingest_t) injected = t;
    }
    json l = {{"id", a.id}, {"kind", a.kind}, {"record_t_ms", a.record_t}, {"ingest_t_ms", a.ingest_t}};
    if (injected) {
      l["injected_t_ms"] = *injected;
      l["latency_ms"] = a.ingest_t - *injected;
    }
    latencies.push_back(std::move(l));
  }

  const auto up = world.uploader_metrics();
  json rejections = service.rejection_counts();
  json metrics = {
      {"scenario", scenario.name},
      {"seed", scenario.seed},
      {"duration_ms", scenario.duration_ms},
      {"ticks", result.timeline.size()},
      {"mode_ticks", mode_ticks},
      {"alert_count", result.alerts.size()},
      {"alerts", alert_counts},
      {"alert_latency", latencies},
      {"latch_violations", latch_violations},
      {"max_tick_displacement_m", max_step},
      {"safe_halt_final", world.arbitration_state().safe_halt},
      {"final_pose",
       {{"x", world.pose().x}, {"y", world.pose().y}, {"heading", world.pose().heading}}},
      {"uploader",
       {{"produced", up.produced},
        {"sent", up.sent},
        {"dropped", up.dropped},
        {"send_failures", up.send_failures},
        {"buffered", up.buffered}}},
      {"service", {{"accepted", service.accepted_count()}, {"rejected", rejections}}},
  };

  write_jsonl(out_dir / "timeline.jsonl", timeline);
  write_jsonl(out_dir / "pose.jsonl", poses);
  write_jsonl(out_dir / "vitals.jsonl", vitals_lines);
  write_jsonl(out_dir / "events.jsonl", world.event_log());
  write_jsonl(out_dir / "alerts.jsonl", alert_lines);
  {
    std::ofstream out(out_dir / "metrics.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoFailure", "cannot write metrics.json");
    out << metrics.dump(2) << '\n';
  }
  result.metrics = std::move(metrics);
  return result;
}

}  // namespace wheelsim::sim
