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
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "oracles.hpp"
#include "wheelsim/http_api.hpp"

using namespace wheelsim;
using namespace wheelsim::monitor;
using telemetry::FeedRecord;

namespace {

const telemetry::Key kKey = telemetry::parse_key_hex("000102030405060708090a0b0c0d0e0f");

FeedRecord calm(Millis t) { return {t, 72, 98, 36.8, 0, 0, ModeId::Voice, {0, 0, 0}}; }

ServiceConfig config() {
  ServiceConfig c;
  c.key = kKey;
  c.async_webhook = false;
  return c;
}

std::string body_of(const telemetry::Bytes& frame) { return {frame.begin(), frame.end()}; }

class StubConsole : public DriveConsole {
 public:
  bool halted = true;
  json last_intent;
  json drive(const json& intent) override {
    if (halted) throw Error("SafeHaltActive", "halted");
    last_intent = intent;
    return {{"ok", true}};
  }
  json set_mode(const json& request) override {
    if (request.value("policy", "") == "bogus") throw Error("BadRequest", "bad policy");
    return {{"policy", request.at("policy")}};
  }
  json clear_safe_halt() override {
    if (hazard) throw Error("HazardStillActive", "hazard");
    halted = false;
    return {{"safe_halt", false}};
  }
  bool hazard = true;
};

struct Fixture {
  MonitorService svc{config()};
  HttpApi api{svc};
  int port = api.start("127.0.0.1", 0);
  httplib::Client cli{"127.0.0.1", port};
  telemetry::FrameEncoder enc{kKey, 0x2a};

  httplib::Result post_frame(const FeedRecord& r) {
    return cli.Post("/ingest", body_of(enc.encode_next(r)), "application/octet-stream");
  }
};

}  // namespace

TEST_SUITE("http_api") {
  TEST_CASE("status codes for error kinds") {
    CHECK(http_status_for("UnknownPatient") == 404);
    CHECK(http_status_for("UnknownAlert") == 404);
    CHECK(http_status_for("AlreadyAcknowledged") == 409);
    CHECK(http_status_for("SafeHaltActive") == 409);
    CHECK(http_status_for("HazardStillActive") == 409);
    CHECK(http_status_for("NoConsole") == 503);
    CHECK(http_status_for("BadRequest") == 400);
    CHECK(http_status_for("AuthFailure") == 400);
  }

  TEST_CASE("ingest accepts authentic frames and rejects the rest") {
    Fixture f;
    auto res = f.post_frame(calm(0));
    REQUIRE(res);
    CHECK(res->status == 202);
    auto j = json::parse(res->body);
    CHECK(j.at("accepted") == true);
    CHECK(j.at("patient_id") == "000000000000002a");

    auto frame = f.enc.encode_next(calm(1000));
    frame.back() ^= 0x80;
    res = f.cli.Post("/ingest", body_of(frame), "application/octet-stream");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body).at("reason") == "AuthFailure");

    res = f.cli.Get("/metrics");
    REQUIRE(res);
    j = json::parse(res->body);
    CHECK(j.at("accepted") == 1);
    CHECK(j.at("rejected").at("AuthFailure") == 1);
  }

  TEST_CASE("latest and range queries") {
    Fixture f;
    for (Millis t = 0; t <= 5000; t += 1000) f.post_frame(calm(t));
    auto res = f.cli.Get("/patients/000000000000002a/latest");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = json::parse(res->body);
    CHECK(j.at("status") == "Green");
    CHECK(j.at("values").at("hr").at("value") == 72.0);
    CHECK(j.at("values").at("hr").at("t") == 5000);

    res = f.cli.Get("/patients/000000000000002a/range?from=1000&to=3000&kind=temp");
    REQUIRE(res);
    j = json::parse(res->body);
    REQUIRE(j.size() == 3);
    CHECK(j[0].at("t") == 1000);
    CHECK(j[2].at("value") == 36.8);

    res = f.cli.Get("/patients/000000000000002a/range");
    CHECK(json::parse(res->body).size() == 6);

    res = f.cli.Get("/patients/000000000000002a/range?from=abc");
    CHECK(res->status == 400);
    res = f.cli.Get("/patients/000000000000002a/range?kind=pulse");
    CHECK(res->status == 400);
    res = f.cli.Get("/patients/nobody/latest");
    CHECK(res->status == 404);
    CHECK(json::parse(res->body).at("error") == "UnknownPatient");
    res = f.cli.Get("/patients/nobody/range");
    CHECK(res->status == 404);
  }

  TEST_CASE("alerts list and acknowledgment") {
    Fixture f;
    auto hot = calm(0);
    hot.hr = 150;
    auto res = f.post_frame(hot);
    const auto id = json::parse(res->body).at("alerts").at(0).get<std::string>();

    res = f.cli.Get("/alerts?active=1");
    auto j = json::parse(res->body);
    REQUIRE(j.size() == 1);
    CHECK(j[0].at("id") == id);
    CHECK(j[0].at("acknowledged") == false);
    CHECK(json::parse(f.cli.Get("/patients/000000000000002a/latest")->body).at("status") == "Red");

    res = f.cli.Post("/alerts/" + id + "/ack", "", "application/json");
    CHECK(res->status == 200);
    CHECK(json::parse(res->body).at("status") == "Green");
    res = f.cli.Post("/alerts/" + id + "/ack", "", "application/json");
    CHECK(res->status == 409);
    res = f.cli.Post("/alerts/A424242/ack", "", "application/json");
    CHECK(res->status == 404);

    CHECK(json::parse(f.cli.Get("/alerts?active=1")->body).empty());
    CHECK(json::parse(f.cli.Get("/alerts")->body).size() == 1);
  }

  TEST_CASE("event stream delivers records and alerts") {
    Fixture f;
    std::string received;
    std::mutex mu;
    std::atomic<bool> done{false};
    std::thread reader([&] {
      httplib::Client sse("127.0.0.1", f.port);
      sse.set_read_timeout(5, 0);
      sse.Get("/stream", [&](const char* data, std::size_t len) {
        std::lock_guard lock(mu);
        received.append(data, len);
        if (received.find("\"type\":\"alert\"") != std::string::npos) {
          done = true;
          return false;
        }
        return true;
      });
    });
    for (int i = 0; i < 200 && f.svc.stream().subscriber_count() == 0; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    REQUIRE(f.svc.stream().subscriber_count() == 1);
    auto hot = calm(0);
    hot.hr = 150;
    f.post_frame(hot);
    reader.join();
    CHECK(done);
    std::lock_guard lock(mu);
    CHECK(received.find("data: {") != std::string::npos);
    CHECK(received.find("\"type\":\"record\"") != std::string::npos);
    CHECK(received.find("\"kind\":\"HeartAttack\"") != std::string::npos);
  }

  TEST_CASE("drive routes need an attached console") {
    Fixture f;
    auto res = f.cli.Post("/drive", R"({"modality":"voice","utterance":"forward"})", "application/json");
    CHECK(res->status == 503);
    CHECK(json::parse(res->body).at("error") == "NoConsole");

    StubConsole console;
    f.svc.set_drive_console(&console);
    res = f.cli.Post("/drive", R"({"modality":"voice","utterance":"forward"})", "application/json");
    CHECK(res->status == 409);
    res = f.cli.Post("/safehalt/clear", "", "application/json");
    CHECK(res->status == 409);
    CHECK(json::parse(res->body).at("error") == "HazardStillActive");
    console.hazard = false;
    res = f.cli.Post("/safehalt/clear", "", "application/json");
    CHECK(res->status == 200);
    res = f.cli.Post("/drive", R"({"modality":"voice","utterance":"forward"})", "application/json");
    CHECK(res->status == 200);
    CHECK(console.last_intent.at("utterance") == "forward");
    res = f.cli.Post("/drive", "{not json", "application/json");
    CHECK(res->status == 400);
    res = f.cli.Post("/mode", R"({"policy":"voice"})", "application/json");
    CHECK(res->status == 200);
    res = f.cli.Post("/mode", R"({"policy":"bogus"})", "application/json");
    CHECK(res->status == 400);
    f.svc.set_drive_console(nullptr);
  }

  TEST_CASE("static files are served when a directory is given") {
    const auto dir = oracle::scratch_dir("http_static");
    std::ofstream(dir / "index.html") << "<html>console</html>";
    MonitorService svc(config());
    HttpApi api(svc, dir);
    const int port = api.start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);
    auto res = cli.Get("/index.html");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == "<html>console</html>");
    CHECK(cli.Get("/metrics")->status == 200);
  }

  TEST_CASE("binding a busy port fails cleanly") {
    MonitorService svc(config());
    HttpApi a(svc);
    const int port = a.start("127.0.0.1", 0);
    HttpApi b(svc);
    try {
      b.start("127.0.0.1", port);
      FAIL("expected BindFailed");
    } catch (const Error& e) {
      CHECK(e.code() == "BindFailed");
    }
  }
}
