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

#include <httplib.h>

#include "wheelsim/monitor.hpp"
#include "wheelsim/uploader.hpp"

namespace wheelsim {

namespace telemetry {

HttpTransport::HttpTransport(std::string host, int port) : host_(std::move(host)), port_(port) {}

bool HttpTransport::send(std::span<const std::uint8_t> frame) {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(0, 500'000);
  client.set_read_timeout(2, 0);
  client.set_write_timeout(2, 0);
  const std::string body(reinterpret_cast<const char*>(frame.data()), frame.size());
  // Any response means the frame reached the monitor; a rejection is final
  // and retrying the same bytes would only be rejected again.
  auto res = client.Post("/ingest", body, "application/octet-stream");
  return static_cast<bool>(res);
}

}  // namespace telemetry

namespace monitor {

bool http_webhook_post(const std::string& url, const std::string& body) {
  // url: http://host[:port]/path
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) return false;
  const auto slash = url.find('/', scheme.size());
  const std::string origin = url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : url.substr(slash);
  httplib::Client client(origin);
  client.set_connection_timeout(1, 0);
  client.set_read_timeout(2, 0);
  auto res = client.Post(path, body, "application/json");
  return res && res->status >= 200 && res->status < 300;
}

}  // namespace monitor

}  // namespace wheelsim
