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

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fixture_gen.hpp"
#include "wheelsim/analytics.hpp"
#include "wheelsim/control_loop.hpp"
#include "wheelsim/http_api.hpp"
#include "wheelsim/json.hpp"
#include "wheelsim/monitor.hpp"
#include "wheelsim/sim.hpp"
#include "wheelsim/uploader.hpp"

namespace fs = std::filesystem;
using namespace wheelsim;

namespace {

const fs::path kFixtureDir = WHEELSIM_FIXTURE_DIR;

monitor::HttpApi* g_api = nullptr;

void on_signal(int) {
  if (g_api) g_api->stop();
}

telemetry::Key resolve_key(const std::string& key) {
  if (key.empty()) return sim::default_key();
  if (fs::exists(key)) return telemetry::load_key_file(key);
  return telemetry::parse_key_hex(key);
}

ModeId require_mode(const std::string& text) {
  const auto m = parse_mode(text);
  if (!m || *m == ModeId::Stop) throw Error("InvalidArgument", "unknown modality '" + text + "'");
  return *m;
}

Direction require_direction(const std::string& text) {
  const auto d = parse_direction(text);
  if (!d) throw Error("InvalidArgument", "unknown command '" + text + "'");
  return *d;
}

int cmd_run(const std::string& scenario_path, const std::string& out, bool realtime) {
  const auto scenario = sim::load_scenario(scenario_path);
  const auto result = sim::run_scenario(scenario, out, {realtime});
  std::cout << result.metrics.dump(2) << "\n";
  return 0;
}

int cmd_trials(const std::string& modality, const std::string& command, std::size_t n,
               const std::string& noise, std::uint64_t seed, const std::string& profile_path,
               const std::string& out) {
  if (noise == "paper") {
    const fs::path path = profile_path.empty() ? kFixtureDir / "trials" / "paper_noise.json"
                                               : fs::path(profile_path);
    auto profile = sim::load_noise_profile(path);
    if (modality != "all") {
      const ModeId m = require_mode(modality);
      std::erase_if(profile.cells, [&](const sim::NoiseCell& c) {
        return c.modality != m || (command != "all" && c.command != require_direction(command));
      });
    }
    const auto table = analytics::accuracy_table(sim::run_profile(profile));
    std::cout << analytics::render(table, analytics::Format::Csv);
    if (!table.note.empty()) std::cout << "note: " << table.note << "\n";
    if (!out.empty()) {
      fs::create_directories(out);
      analytics::emit_report(table, analytics::Format::Csv, fs::path(out) / "accuracy.csv");
      analytics::emit_report(table, analytics::Format::Json, fs::path(out) / "accuracy.json");
      analytics::emit_report(table, analytics::Format::PlotData, fs::path(out) / "accuracy_plot.json");
    }
    return 0;
  }
  const double p = std::stod(noise);
  const ModeId m = require_mode(modality);
  const Direction d = require_direction(command);
  const auto cell = sim::run_trials(m, d, n, p, seed);
  std::cout << json{{"modality", m},
                    {"command", d},
                    {"trials", cell.trials},
                    {"successes", cell.successes},
                    {"percent", 100.0 * cell.successes / cell.trials}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_fit_noise(const std::string& out) {
  // Published per-cell success counts, rows Right, Left, Forward, Backward, Stop.
  const std::map<ModeId, std::array<std::size_t, 5>> targets = {
      {ModeId::Gesture, {95, 100, 100, 95, 90}},
      {ModeId::Voice, {90, 95, 100, 95, 100}},
      {ModeId::EOG, {95, 95, 95, 90, 95}},
      {ModeId::Joystick, {100, 100, 100, 95, 95}},
  };
  sim::NoiseProfile profile;
  profile.label =
      "fitted fixture: per-cell recognition noise and seed chosen so that 100 trials reproduce the "
      "published success counts; not a model of real recognition behaviour";
  profile.trials = 100;
  for (ModeId m : sim::kTrialModalities) {
    for (std::size_t i = 0; i < sim::kTrialCommands.size(); ++i) {
      const auto cell = sim::fit_noise_cell(m, sim::kTrialCommands[i], 100, targets.at(m)[i]);
      std::cerr << to_string(m) << "/" << to_string(cell.command) << ": noise " << cell.noise
                << " seed " << cell.seed << "\n";
      profile.cells.push_back(cell);
    }
  }
  fs::create_directories(fs::path(out).parent_path());
  sim::save_noise_profile(out, profile);
  return 0;
}

int cmd_analyze(const std::string& pairs, const std::string& kind, const std::string& out) {
  const auto readings = analytics::load_pairs_csv(pairs, kind);
  const auto report = analytics::bland_altman(readings);
  fs::create_directories(out);
  analytics::emit_report(report, analytics::Format::Csv, fs::path(out) / (kind + "_agreement.csv"));
  analytics::emit_report(report, analytics::Format::Json, fs::path(out) / (kind + "_agreement.json"));
  analytics::emit_report(report, analytics::Format::PlotData, fs::path(out) / (kind + "_plot.json"));
  std::cout << analytics::render(report, analytics::Format::Csv);
  return 0;
}

int cmd_replay(const std::string& trace, bool realtime) {
  std::ifstream in(trace);
  if (!in) throw Error("IoFailure", "cannot open " + trace);
  arbitration::JsonlTraceSource source(in);
  arbitration::LoopOptions options;
  options.realtime = realtime;
  arbitration::ControlLoop loop(options);
  const auto stats = loop.run(source, [](const arbitration::TickOutput& out) {
    std::cout << jsonl(json(out));
  });
  std::cerr << "ticks " << stats.ticks << ", mean period " << stats.mean_ms << " ms\n";
  return 0;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string key;
  std::string data_dir = "wheelsim-data/store";
  std::string outbox_dir = "wheelsim-data/outbox";
  std::string webhook;
  std::string static_dir;
  bool no_session = false;
  std::uint64_t seed = 1;
};

int cmd_serve(const ServeOptions& o) {
  monitor::ServiceConfig cfg;
  cfg.key = resolve_key(o.key);
  cfg.data_dir = o.data_dir;
  cfg.outbox_dir = o.outbox_dir;
  cfg.webhook_url = o.webhook;
  cfg.time_base_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  monitor::MonitorService service(cfg);

  std::unique_ptr<sim::LiveSession> session;
  if (!o.no_session) {
    sim::WorldConfig w;
    w.seed = o.seed;
    w.key = cfg.key;
    w.time_base_ms = cfg.time_base_ms;
    w.noise = {{calibration::VitalKind::HeartRate, 0.8},
               {calibration::VitalKind::SpO2, 0.5},
               {calibration::VitalKind::Temperature, 0.2}};
    service.register_patient(telemetry::patient_id_for(w.device_id));
    session = std::make_unique<sim::LiveSession>(w, service);
    service.set_drive_console(session.get());
    session->start();
  }

  monitor::HttpApi api(service, o.static_dir);
  g_api = &api;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "monitor listening on http://" << o.host << ":" << o.port << "\n";
  api.serve_blocking(o.host, o.port);
  g_api = nullptr;
  if (session) {
    service.set_drive_console(nullptr);
    session->stop();
  }
  return 0;
}

int cmd_clear_safehalt(const std::string& url) {
  httplib::Client client(url);
  auto res = client.Post("/safehalt/clear", "", "application/json");
  if (!res) {
    std::cerr << "no response from " << url << "\n";
    return 1;
  }
  std::cout << res->body << "\n";
  return res->status == 200 ? 0 : 1;
}

int cmd_overheads(std::size_t iterations, Millis loop_ms, bool realtime) {
  monitor::ServiceConfig cfg;
  cfg.key = sim::default_key();
  monitor::MonitorService service(cfg);
  monitor::HttpApi api(service);
  const int port = api.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  client.set_keep_alive(true);

  telemetry::OverheadOptions options;
  options.rtt_iterations = iterations;
  options.loop_duration_ms = loop_ms;
  options.realtime_loop = realtime;
  const auto report = telemetry::measure_overheads(options, [&](std::span<const std::uint8_t> frame) {
    const std::string body(reinterpret_cast<const char*>(frame.data()), frame.size());
    auto res = client.Post("/ingest", body, "application/octet-stream");
    return res && res->status == 202;
  });
  std::cout << json(report).dump(2) << "\n";
  api.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wheelsim: assistive wheelchair controller and health-monitoring simulator"};
  app.require_subcommand(1);

  std::string scenario, out;
  bool realtime = false;
  auto* run = app.add_subcommand("run", "Run a scenario over simulated time");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_flag("--realtime", realtime, "Pace ticks against the wall clock");

  std::string modality = "all", command = "all", noise = "0", profile;
  std::size_t n = 100;
  std::uint64_t seed = 1;
  auto* trials = app.add_subcommand("trials", "Run command-accuracy trials");
  trials->add_option("--modality", modality, "joystick|voice|gesture|eog|all");
  trials->add_option("--command", command, "right|left|forward|backward|stop|all");
  trials->add_option("--n", n, "Trials per cell")->check(CLI::PositiveNumber);
  trials->add_option("--noise", noise, "Corruption probability, or 'paper' for the fitted fixture");
  trials->add_option("--seed", seed, "RNG seed");
  trials->add_option("--profile", profile, "Noise profile file used with --noise paper");
  trials->add_option("--out", out, "Directory for accuracy reports (with --noise paper)");

  std::string fit_out = (kFixtureDir / "trials" / "paper_noise.json").string();
  auto* fit = app.add_subcommand("fit-noise", "Fit the per-cell noise fixture to the published counts");
  fit->add_option("--out", fit_out, "Output profile path");

  std::string gen_out = kFixtureDir.string();
  auto* gen = app.add_subcommand("gen-fixtures", "Regenerate the synthetic data fixtures");
  gen->add_option("--out", gen_out, "Fixture directory");

  ServeOptions serve_opts;
  auto* serve = app.add_subcommand("serve", "Run the monitor service with a live chair session");
  serve->add_option("--host", serve_opts.host, "Bind address");
  serve->add_option("--port", serve_opts.port, "TCP port");
  serve->add_option("--key", serve_opts.key, "AES-128 key as 32 hex digits or a key file");
  serve->add_option("--data", serve_opts.data_dir, "Append-only store directory");
  serve->add_option("--outbox", serve_opts.outbox_dir, "Email outbox directory");
  serve->add_option("--webhook", serve_opts.webhook, "Alert webhook URL (http://host:port/path)");
  serve->add_option("--static", serve_opts.static_dir, "Directory of static files to serve");
  serve->add_option("--seed", serve_opts.seed, "Seed for the live session");
  serve->add_flag("--no-session", serve_opts.no_session, "Do not attach a simulated chair");

  std::string url = "http://127.0.0.1:8080";
  auto* clear = app.add_subcommand("clear-safehalt", "Ask a running service to clear the safe-halt latch");
  clear->add_option("--url", url, "Service base URL");

  std::string pairs, kind;
  auto* analyze = app.add_subcommand("analyze", "Bland-Altman agreement for paired readings");
  analyze->add_option("--pairs", pairs, "CSV with header module,reference")->required();
  analyze->add_option("--kind", kind, "hr|spo2|temp")
      ->required()
      ->check(CLI::IsMember({"hr", "spo2", "temp"}));
  analyze->add_option("--out", out, "Output directory")->required();

  std::string trace;
  auto* replay = app.add_subcommand("replay", "Replay a JSONL ControlInputs trace through the loop");
  replay->add_option("--trace", trace, "Trace file, one snapshot per line, null for a missed tick")
      ->required();
  replay->add_flag("--realtime", realtime, "Pace ticks against the wall clock");

  std::size_t rtt_iterations = 50;
  Millis loop_ms = 2000;
  bool simulated_loop = false;
  auto* overheads = app.add_subcommand("overheads", "Measure protocol overheads and the loop period");
  overheads->add_option("--rtt-iterations", rtt_iterations, "Round trips to time");
  overheads->add_option("--loop-ms", loop_ms, "Control loop run length");
  overheads->add_flag("--simulated-loop", simulated_loop, "Do not pace the loop in real time");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, out, realtime);
    if (*trials) return cmd_trials(modality, command, n, noise, seed, profile, out);
    if (*fit) return cmd_fit_noise(fit_out);
    if (*gen) {
      tools::generate_fixtures(gen_out);
      return 0;
    }
    if (*serve) return cmd_serve(serve_opts);
    if (*clear) return cmd_clear_safehalt(url);
    if (*analyze) return cmd_analyze(pairs, kind, out);
    if (*replay) return cmd_replay(trace, realtime);
    if (*overheads) return cmd_overheads(rtt_iterations, loop_ms, !simulated_loop);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
