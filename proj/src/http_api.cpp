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

#include "wheelsim/http_api.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>

namespace wheelsim::monitor {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status_for(e.code()), {{"error", e.code()}, {"message", e.what()}});
}

Millis parse_millis(const httplib::Request& req, const char* name, Millis fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string text = req.get_param_value(name);
  Millis value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("BadRequest", std::string("invalid ") + name);
  }
  return value;
}

double project(const FeedRecord& r, const std::string& kind) {
  if (kind == "hr") return r.hr;
  if (kind == "spo2") return r.spo2;
  if (kind == "temp") return r.temp;
  if (kind == "fall") return r.fall;
  return r.convulsion;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error("BadRequest", e.what());
  }
}

}  // namespace

int http_status_for(const std::string& code) {
  if (code == "UnknownPatient" || code == "UnknownAlert") return 404;
  if (code == "AlreadyAcknowledged" || code == "SafeHaltActive" || code == "HazardStillActive") {
    return 409;
  }
  if (code == "NoConsole") return 503;
  return 400;
}

struct HttpApi::Impl {
  MonitorService& service;
  httplib::Server server;
  std::atomic<bool> stopping{false};

  explicit Impl(MonitorService& s) : service(s) {
    // SO_REUSEPORT would let a second service bind the same port silently.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
  }

  template <typename F>
  void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error("BadRequest", e.what()));
    }
  }

  template <typename F>
  void console_call(httplib::Response& res, F&& f) {
    guarded(res, [&] {
      DriveConsole* console = service.drive_console();
      if (!console) throw Error("NoConsole", "no drive session attached");
      send_json(res, 200, f(*console));
    });
  }

  void routes() {
    server.Post("/ingest", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
      const IngestResult r = service.ingest({data, req.body.size()});
      if (r.accepted) {
        json alerts = json::array();
        for (const auto& a : r.alerts) alerts.push_back(a.id);
        send_json(res, 202, {{"accepted", true}, {"patient_id", r.patient_id}, {"alerts", alerts}});
      } else {
        send_json(res, 400, {{"accepted", false}, {"reason", r.reason}});
      }
    });

    server.Get(R"(/patients/([^/]+)/latest)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { send_json(res, 200, service.query_latest(req.matches[1])); });
               });

    server.Get(R"(/patients/([^/]+)/range)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   RangeQuery q;
                   q.t0 = parse_millis(req, "from", std::numeric_limits<Millis>::min());
                   q.t1 = parse_millis(req, "to", std::numeric_limits<Millis>::max());
                   q.kind = req.has_param("kind") ? req.get_param_value("kind") : "";
                   const auto records = service.query_range(req.matches[1], q);
                   json out = json::array();
                   for (const auto& r : records) {
                     if (q.kind.empty()) {
                       out.push_back(r);
                     } else {
                       out.push_back({{"t", r.t}, {"value", project(r, q.kind)}});
                     }
                   }
                   send_json(res, 200, out);
                 });
               });

    server.Get("/alerts", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string active = req.has_param("active") ? req.get_param_value("active") : "";
      const bool only_active = active == "1" || active == "true";
      json out = json::array();
      for (const auto& a : service.alerts(only_active)) {
        json j = a.event;
        j["acknowledged"] = a.acknowledged;
        out.push_back(std::move(j));
      }
      send_json(res, 200, out);
    });

    server.Post(R"(/alerts/([^/]+)/ack)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    const Severity status = service.acknowledge(id);
                    send_json(res, 200,
                              {{"id", id}, {"status", std::string(vitals::to_string(status))}});
                  });
                });

    server.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"accepted", service.accepted_count()},
                           {"rejected", service.rejection_counts()},
                           {"subscribers", service.stream().subscriber_count()}});
    });

    server.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
      auto sub = service.stream().subscribe();
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, sub](std::size_t, httplib::DataSink& sink) {
            if (stopping || sub->closed()) {
              sink.done();
              return true;
            }
            auto event = sub->next(std::chrono::milliseconds(250));
            std::string chunk = event ? "data: " + event->dump() + "\n\n" : ": keepalive\n\n";
            return sink.write(chunk.data(), chunk.size());
          },
          [sub](bool) { sub->close(); });
    });

    server.Post("/drive", [this](const httplib::Request& req, httplib::Response& res) {
      console_call(res, [&](DriveConsole& c) { return c.drive(parse_body(req)); });
    });
    server.Post("/mode", [this](const httplib::Request& req, httplib::Response& res) {
      console_call(res, [&](DriveConsole& c) { return c.set_mode(parse_body(req)); });
    });
    server.Post("/safehalt/clear", [this](const httplib::Request&, httplib::Response& res) {
      console_call(res, [&](DriveConsole& c) { return c.clear_safe_halt(); });
    });
  }
};

HttpApi::HttpApi(MonitorService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
  if (!static_dir.empty()) impl_->server.set_mount_point("/", static_dir.string());
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
    if (port_ < 0) throw Error("BindFailed", "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw Error("BindFailed", "cannot bind " + host + ":" + std::to_string(port));
    }
    port_ = port;
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void HttpApi::serve_blocking(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("BindFailed", "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  impl_->server.listen_after_bind();
}

void HttpApi::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace wheelsim::monitor
