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

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "wheelsim/monitor.hpp"
#include "wheelsim/rng.hpp"

using namespace wheelsim;
using namespace wheelsim::monitor;
using telemetry::FeedRecord;

namespace {

const telemetry::Key kKey = telemetry::parse_key_hex("000102030405060708090a0b0c0d0e0f");

FeedRecord calm(Millis t) { return {t, 72, 98, 36.8, 0, 0, ModeId::Joystick, {1.5, -2.0, 0}}; }

ServiceConfig base_config() {
  ServiceConfig c;
  c.key = kKey;
  c.async_webhook = false;
  c.clock = [] { return Millis{1'700'000'000'000}; };
  c.sleep_ms = [](Millis) {};
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_files(const std::filesystem::path& dir, const std::string& ext) {
  std::size_t n = 0;
  if (!std::filesystem::exists(dir)) return 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

}  // namespace

TEST_SUITE("monitor") {
  TEST_CASE("authentic frames are stored and queryable") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 0x42);
    const auto r = svc.ingest(enc.encode_next(calm(1000)));
    CHECK(r.accepted);
    CHECK(r.patient_id == "0000000000000042");
    CHECK(r.alerts.empty());
    const auto latest = svc.query_latest(r.patient_id);
    CHECK(latest.status == Severity::Green);
    CHECK(latest.values.at("hr").value == 72);
    CHECK(latest.values.at("hr").t == 1000);
    CHECK(latest.newest->pose.x == 1.5);
    CHECK(svc.accepted_count() == 1);
  }

  TEST_CASE("rejected frames are counted and never stored") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 7);
    auto good = enc.encode_next(calm(0));
    REQUIRE(svc.ingest(good).accepted);

    auto tampered = enc.encode_next(calm(1000));
    tampered[20] ^= 0x01;
    auto r = svc.ingest(tampered);
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == "AuthFailure");

    r = svc.ingest(good);
    CHECK(r.reason == "Replay");

    auto other = kKey;
    other[5] ^= 0xff;
    telemetry::FrameEncoder foreign(other, 7);
    foreign.encode(calm(2000), 100);
    CHECK(svc.ingest(foreign.encode(calm(3000), 101)).reason == "AuthFailure");

    std::vector<std::uint8_t> junk{1, 2, 3};
    CHECK(svc.ingest(junk).reason == "BadMagic");

    const auto counts = svc.rejection_counts();
    CHECK(counts.at("AuthFailure") == 2);
    CHECK(counts.at("Replay") == 1);
    CHECK(counts.at("BadMagic") == 1);
    CHECK(svc.accepted_count() == 1);
    CHECK(svc.query_range("0000000000000007", {0, 1'000'000, ""}).size() == 1);
  }

  TEST_CASE("a heart rate of 150 raises a red alert") {
    const auto outbox = oracle::scratch_dir("monitor_hr") / "outbox";
    auto cfg = base_config();
    cfg.outbox_dir = outbox;
    MonitorService svc(cfg);
    telemetry::FrameEncoder enc(kKey, 1);
    svc.ingest(enc.encode_next(calm(0)));
    auto hot = calm(1000);
    hot.hr = 150;
    const auto r = svc.ingest(enc.encode_next(hot));
    REQUIRE(r.alerts.size() == 1);
    const auto& a = r.alerts[0];
    CHECK(a.kind == vitals::AlertKind::HeartAttack);
    CHECK(a.severity == Severity::Red);
    CHECK(a.value == 150);
    CHECK(a.t == 1000);
    CHECK(a.location.x == 1.5);
    CHECK(a.delivered.at("outbox").ok);
    CHECK(a.delivered.at("stream").ok);

    const auto latest = svc.query_latest(r.patient_id);
    CHECK(latest.status == Severity::Red);
    REQUIRE(latest.active_alerts.size() == 1);

    const auto eml = slurp(outbox / (a.id + ".eml"));
    CHECK(eml.find("Subject: [RED] HeartAttack alert for patient 0000000000000001") != std::string::npos);
    CHECK(eml.find("Value: 150.0 bpm") != std::string::npos);
    CHECK(eml.find("Emergency time: 1970-01-01 00:00:01.000 UTC") != std::string::npos);
    CHECK(eml.find("Location: x=1.5 m, y=-2 m") != std::string::npos);
    CHECK(eml.find("Patient: 0000000000000001") != std::string::npos);
    CHECK(count_files(outbox, ".tmp") == 0);
  }

  TEST_CASE("each kind of threshold crossing raises its own alert") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 2);
    auto r = calm(0);
    r.hr = 30;
    r.temp = 38.5;
    r.spo2 = 90;
    r.fall = 1;
    r.convulsion = 1;
    const auto res = svc.ingest(enc.encode_next(r));
    std::set<vitals::AlertKind> kinds;
    for (const auto& a : res.alerts) kinds.insert(a.kind);
    CHECK(kinds == std::set<vitals::AlertKind>{vitals::AlertKind::HeartAttack, vitals::AlertKind::TempHigh,
                                               vitals::AlertKind::SpO2Low, vitals::AlertKind::Fall,
                                               vitals::AlertKind::Convulsion});
    auto cold = calm(1000);
    cold.temp = 35.0;
    const auto res2 = svc.ingest(enc.encode_next(cold));
    REQUIRE(res2.alerts.size() == 1);
    CHECK(res2.alerts[0].kind == vitals::AlertKind::TempLow);
  }

  TEST_CASE("green records never reach the outbox") {
    const auto outbox = oracle::scratch_dir("monitor_green") / "outbox";
    auto cfg = base_config();
    cfg.outbox_dir = outbox;
    MonitorService svc(cfg);
    telemetry::FrameEncoder enc(kKey, 3);
    for (Millis t = 0; t < 20'000; t += 1000) svc.ingest(enc.encode_next(calm(t)));
    CHECK(count_files(outbox, ".eml") == 0);
    vitals::AlertEvent green;
    green.severity = Severity::Green;
    CHECK(svc.dispatch_alert(green).empty());
    CHECK(count_files(outbox, ".eml") == 0);
  }

  TEST_CASE("one alert per episode") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 4);
    std::size_t raised = 0;
    const std::vector<double> hrs{72, 150, 155, 160, 150, 100, 72, 145, 150, 72};
    for (std::size_t i = 0; i < hrs.size(); ++i) {
      auto r = calm(static_cast<Millis>(i) * 1000);
      r.hr = hrs[i];
      raised += svc.ingest(enc.encode_next(r)).alerts.size();
    }
    CHECK(raised == 2);
    CHECK(svc.alerts(false).size() == 2);
  }

  TEST_CASE("monitor alerts agree with the edge thresholds on random records") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 5);
    Rng rng(12);
    std::set<vitals::AlertKind> prev;
    for (int i = 0; i < 2000; ++i) {
      FeedRecord r = calm(i * 1000);
      r.hr = rng.uniform(20, 180);
      r.temp = rng.uniform(34, 40);
      r.spo2 = rng.uniform(85, 100);
      r.fall = rng.bernoulli(0.1);
      r.convulsion = rng.bernoulli(0.05);
      std::set<vitals::AlertKind> now;
      if (r.hr > 140 || r.hr < 40) now.insert(vitals::AlertKind::HeartAttack);
      if (r.temp > 38.0) now.insert(vitals::AlertKind::TempHigh);
      if (r.temp < 35.5) now.insert(vitals::AlertKind::TempLow);
      if (r.spo2 < 94.0) now.insert(vitals::AlertKind::SpO2Low);
      if (r.fall) now.insert(vitals::AlertKind::Fall);
      if (r.convulsion) now.insert(vitals::AlertKind::Convulsion);
      std::set<vitals::AlertKind> expected;
      for (auto k : now) {
        if (!prev.count(k)) expected.insert(k);
      }
      std::set<vitals::AlertKind> got;
      for (const auto& a : svc.ingest(enc.encode_next(r)).alerts) got.insert(a.kind);
      CHECK(got == expected);
      prev = now;
    }
  }

  TEST_CASE("range queries use a closed interval") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 6);
    for (Millis t = 0; t <= 10'000; t += 1000) svc.ingest(enc.encode_next(calm(t)));
    const std::string pid = "0000000000000006";
    const auto mid = svc.query_range(pid, {2000, 5000, "hr"});
    REQUIRE(mid.size() == 4);
    CHECK(mid.front().t == 2000);
    CHECK(mid.back().t == 5000);
    CHECK(svc.query_range(pid, {20'000, 30'000, ""}).empty());
    CHECK(svc.query_range(pid, {5000, 5000, ""}).size() == 1);
    try {
      svc.query_range("ffffffffffffffff", {0, 1, ""});
      FAIL("expected UnknownPatient");
    } catch (const Error& e) {
      CHECK(e.code() == "UnknownPatient");
    }
    CHECK_THROWS_AS(svc.query_range(pid, {0, 1, "pulse"}), Error);
    CHECK_THROWS_AS(svc.query_latest("nobody"), Error);
  }

  TEST_CASE("acknowledging alerts clears the status") {
    MonitorService svc(base_config());
    telemetry::FrameEncoder enc(kKey, 8);
    auto r = calm(0);
    r.hr = 150;
    r.fall = 1;
    const auto res = svc.ingest(enc.encode_next(r));
    REQUIRE(res.alerts.size() == 2);
    CHECK(svc.acknowledge(res.alerts[0].id) == Severity::Red);
    CHECK(svc.alerts(true).size() == 1);
    CHECK(svc.acknowledge(res.alerts[1].id) == Severity::Green);
    CHECK(svc.query_latest(res.patient_id).status == Severity::Green);
    CHECK(svc.query_latest(res.patient_id).active_alerts.empty());
    try {
      svc.acknowledge(res.alerts[1].id);
      FAIL("expected AlreadyAcknowledged");
    } catch (const Error& e) {
      CHECK(e.code() == "AlreadyAcknowledged");
    }
    try {
      svc.acknowledge("A999999");
      FAIL("expected UnknownAlert");
    } catch (const Error& e) {
      CHECK(e.code() == "UnknownAlert");
    }
  }

  TEST_CASE("webhook retries with doubling backoff") {
    auto cfg = base_config();
    cfg.webhook_url = "http://127.0.0.1:9/hook";
    std::vector<Millis> sleeps;
    int calls = 0;
    std::string last_body;
    cfg.sleep_ms = [&](Millis ms) { sleeps.push_back(ms); };
    cfg.webhook_post = [&](const std::string&, const std::string& body) {
      last_body = body;
      return ++calls == 3;
    };
    MonitorService svc(cfg);
    telemetry::FrameEncoder enc(kKey, 9);
    auto r = calm(0);
    r.hr = 150;
    const auto res = svc.ingest(enc.encode_next(r));
    REQUIRE(res.alerts.size() == 1);
    const auto& d = res.alerts[0].delivered.at("webhook");
    CHECK(d.ok);
    CHECK(d.attempts == 3);
    CHECK(sleeps == std::vector<Millis>{200, 400});
    const auto body = json::parse(last_body);
    CHECK(body.at("kind") == "HeartAttack");
    CHECK_FALSE(body.contains("delivered"));
  }

  TEST_CASE("a dead webhook does not block the outbox") {
    const auto outbox = oracle::scratch_dir("monitor_hook_down") / "outbox";
    auto cfg = base_config();
    cfg.outbox_dir = outbox;
    cfg.webhook_url = "http://127.0.0.1:9/hook";
    cfg.webhook_post = [](const std::string&, const std::string&) { return false; };
    MonitorService svc(cfg);
    telemetry::FrameEncoder enc(kKey, 10);
    auto r = calm(0);
    r.spo2 = 85;
    const auto res = svc.ingest(enc.encode_next(r));
    REQUIRE(res.alerts.size() == 1);
    CHECK_FALSE(res.alerts[0].delivered.at("webhook").ok);
    CHECK(res.alerts[0].delivered.at("webhook").attempts == 4);
    CHECK(res.alerts[0].delivered.at("outbox").ok);
    CHECK(count_files(outbox, ".eml") == 1);
    const auto stored = svc.alerts(false).at(0).event.delivered;
    CHECK_FALSE(stored.at("webhook").ok);
  }

  TEST_CASE("asynchronous webhook delivery completes") {
    auto cfg = base_config();
    cfg.async_webhook = true;
    cfg.webhook_url = "http://example.invalid/hook";
    std::atomic<int> calls{0};
    cfg.webhook_post = [&](const std::string&, const std::string&) {
      ++calls;
      return true;
    };
    MonitorService svc(cfg);
    telemetry::FrameEncoder enc(kKey, 11);
    auto r = calm(0);
    r.fall = 1;
    const auto res = svc.ingest(enc.encode_next(r));
    CHECK(res.alerts.at(0).delivered.at("webhook").detail == "queued");
    svc.wait_for_deliveries();
    CHECK(calls == 1);
    CHECK(svc.alerts(false).at(0).event.delivered.at("webhook").ok);
  }

  TEST_CASE("restart replays the persisted state") {
    const auto dir = oracle::scratch_dir("monitor_restart");
    auto cfg = base_config();
    cfg.data_dir = dir / "data";
    std::vector<std::uint8_t> replay_probe;
    json before_latest, before_range, before_alerts;
    {
      MonitorService svc(cfg);
      telemetry::FrameEncoder enc(kKey, 12);
      for (Millis t = 0; t < 30'000; t += 1000) {
        auto r = calm(t);
        if (t >= 10'000 && t < 13'000) r.hr = 150;
        if (t == 20'000) r.fall = 1;
        const auto frame = enc.encode_next(r);
        svc.ingest(frame);
        if (t == 5000) replay_probe = frame;
      }
      svc.acknowledge(svc.alerts(false).at(0).event.id);
      before_latest = svc.query_latest("000000000000000c");
      before_range = svc.query_range("000000000000000c", {0, 100'000, ""});
      for (const auto& a : svc.alerts(false)) before_alerts.push_back({a.event, a.acknowledged});
    }
    MonitorService again(cfg);
    CHECK(json(again.query_latest("000000000000000c")) == before_latest);
    CHECK(json(again.query_range("000000000000000c", {0, 100'000, ""})) == before_range);
    json after_alerts;
    for (const auto& a : again.alerts(false)) after_alerts.push_back({a.event, a.acknowledged});
    CHECK(after_alerts == before_alerts);
    CHECK(again.accepted_count() == 30);
    CHECK(again.ingest(replay_probe).reason == "Replay");

    // The alert counter continues, and open episodes are not raised again.
    telemetry::FrameEncoder enc(kKey, 12);
    enc.encode(calm(0), 1000);
    auto r = calm(40'000);
    r.hr = 150;
    const auto res = again.ingest(enc.encode_next(r));
    REQUIRE(res.alerts.size() == 1);
    CHECK(res.alerts[0].id == "A000003");
  }

  TEST_CASE("stream subscribers receive records and alerts") {
    MonitorService svc(base_config());
    auto sub = svc.stream().subscribe(16);
    telemetry::FrameEncoder enc(kKey, 13);
    auto r = calm(0);
    r.hr = 150;
    svc.ingest(enc.encode_next(r));
    const auto e1 = sub->next(std::chrono::milliseconds(100));
    const auto e2 = sub->next(std::chrono::milliseconds(100));
    REQUIRE(e1);
    REQUIRE(e2);
    CHECK(e1->at("type") == "record");
    CHECK(e2->at("type") == "alert");
    CHECK(e2->at("alert").at("kind") == "HeartAttack");
    svc.acknowledge(e2->at("alert").at("id").get<std::string>());
    const auto e3 = sub->next(std::chrono::milliseconds(100));
    REQUIRE(e3);
    CHECK(e3->at("type") == "ack");
    CHECK(e3->at("status") == "Green");
    CHECK_FALSE(sub->next(std::chrono::milliseconds(10)));
  }

  TEST_CASE("slow subscribers are dropped") {
    EventStream stream;
    auto slow = stream.subscribe(4);
    auto fast = stream.subscribe(100);
    for (int i = 0; i < 10; ++i) stream.publish({{"i", i}});
    CHECK(slow->dropped());
    CHECK(slow->closed());
    CHECK_FALSE(fast->dropped());
    CHECK(fast->drain().size() == 10);
    CHECK(stream.subscriber_count() == 1);
    stream.close_all();
    CHECK(fast->closed());
    CHECK(stream.subscriber_count() == 0);
  }

  TEST_CASE("concurrent ingest from several devices") {
    MonitorService svc(base_config());
    std::vector<std::thread> threads;
    for (std::uint64_t dev = 100; dev < 108; ++dev) {
      threads.emplace_back([&svc, dev] {
        telemetry::FrameEncoder enc(kKey, dev);
        for (Millis t = 0; t < 200'000; t += 1000) svc.ingest(enc.encode_next(calm(t)));
      });
    }
    std::thread reader([&] {
      for (int i = 0; i < 200; ++i) (void)svc.alerts(false);
    });
    for (auto& t : threads) t.join();
    reader.join();
    CHECK(svc.accepted_count() == 8 * 200);
    CHECK(svc.rejection_counts().empty());
    CHECK(svc.query_range(telemetry::patient_id_for(103), {0, 1'000'000, ""}).size() == 200);
  }

  TEST_CASE("out of order records keep the newest as latest") {
    ChannelStore store;
    store.append(calm(5000));
    auto older = calm(1000);
    older.hr = 90;
    store.append(older);
    CHECK(store.latest().at("hr").value == 72);
    CHECK(store.newest()->t == 5000);
    CHECK(store.records().size() == 2);
  }
}
