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

// HTTP front end of the monitor service.
//
//   POST /ingest                      sealed frame body -> 202 | 400 {reason}
//   GET  /patients/{id}/latest        -> 200 | 404
//   GET  /patients/{id}/range?from=&to=[&kind=]
//   GET  /alerts[?active=1]
//   POST /alerts/{id}/ack             -> 200 | 404 | 409
//   GET  /stream                      server-sent events
//   POST /drive, /mode, /safehalt/clear   forwarded to the drive console
//   GET  /metrics                     ingest counters

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "wheelsim/monitor.hpp"

namespace wheelsim::monitor {

class HttpApi {
 public:
  explicit HttpApi(MonitorService& service, std::filesystem::path static_dir = {});
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws Error("BindFailed").
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void serve_blocking(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

/// HTTP status for a library error code.
int http_status_for(const std::string& code);

}  // namespace wheelsim::monitor
