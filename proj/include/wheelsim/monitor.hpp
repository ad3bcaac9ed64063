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

// Monitor service core: authenticated ingest, append-only per-patient
// storage, server-side threshold re-validation, alert dispatch and the live
// event stream. The HTTP binding lives in http_api.hpp.

#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "wheelsim/telemetry.hpp"
#include "wheelsim/vitals.hpp"

namespace wheelsim::monitor {

using telemetry::FeedRecord;
using vitals::AlertEvent;
using vitals::Severity;

// ---------------------------------------------------------------------------
// Live stream

/// One consumer of the broadcast stream. A consumer that falls more than
/// `capacity` events behind is cut off rather than slowing the publisher.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  /// Waits up to `timeout` for the next event.
  std::optional<json> next(std::chrono::milliseconds timeout);
  std::vector<json> drain();
  bool dropped() const;
  void close();
  bool closed() const;

 private:
  friend class EventStream;
  /// Returns false if the subscriber overflowed.
  bool offer(const json& event);

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<json> events_;
  bool dropped_ = false;
  bool closed_ = false;
};

class EventStream {
 public:
  std::shared_ptr<Subscription> subscribe(std::size_t capacity = 256);
  void publish(const json& event);
  std::size_t subscriber_count() const;
  void close_all();

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscription>> subscribers_;
};

// ---------------------------------------------------------------------------
// Storage

/// Append-only record log for one patient plus the latest-value index.
class ChannelStore {
 public:
  struct Latest {
    double value = 0.0;
    Millis t = 0;
  };

  void append(const FeedRecord& r);
  const std::vector<FeedRecord>& records() const { return records_; }
  /// Keys: hr, spo2, temp, fall, convulsion.
  const std::map<std::string, Latest>& latest() const { return latest_; }
  std::optional<FeedRecord> newest() const;

 private:
  std::vector<FeedRecord> records_;
  std::map<std::string, Latest> latest_;
  std::optional<std::size_t> newest_index_;
};

// ---------------------------------------------------------------------------
// Service

/// Operator console of a running chair session; endpoints that steer the
/// chair are forwarded here. Refusals are thrown as Error; SafeHaltActive
/// is the common one.
class DriveConsole {
 public:
  virtual ~DriveConsole() = default;
  virtual json drive(const json& intent) = 0;
  virtual json set_mode(const json& request) = 0;
  virtual json clear_safe_halt() = 0;
};

using WebhookPost = std::function<bool(const std::string& url, const std::string& body)>;

/// HTTP POST of a JSON body through cpp-httplib.
bool http_webhook_post(const std::string& url, const std::string& body);

struct ServiceConfig {
  telemetry::Key key{};
  vitals::DetectorConfig detectors;
  std::filesystem::path data_dir;    // empty: in-memory only
  std::filesystem::path outbox_dir;  // empty: no email outbox
  std::string webhook_url;           // empty: webhook disabled
  std::string email_to = "caregiver@localhost";
  std::string email_from = "monitor@localhost";
  int webhook_retries = 3;
  Millis webhook_backoff_ms = 200;
  /// Deliver webhooks from a worker thread so ingest never waits on them.
  bool async_webhook = true;
  /// Unix time (ms) corresponding to record time t = 0.
  Millis time_base_ms = 0;
  /// Wall clock for outbox "written at" stamps; defaults to the system clock.
  std::function<Millis()> clock;
  WebhookPost webhook_post = http_webhook_post;
  std::function<void(Millis)> sleep_ms;
};

struct IngestResult {
  bool accepted = false;
  std::string reason;  // error code when rejected
  std::string patient_id;
  std::optional<FeedRecord> record;
  std::vector<AlertEvent> alerts;
};

struct AlertRecord {
  AlertEvent event;
  bool acknowledged = false;
};

struct LatestView {
  std::string patient_id;
  std::map<std::string, ChannelStore::Latest> values;
  std::optional<FeedRecord> newest;
  Severity status = Severity::Green;
  std::vector<AlertEvent> active_alerts;
};

void to_json(json& j, const LatestView& v);

/// Range query kind filter: hr, spo2, temp, fall, convulsion. Empty = all.
struct RangeQuery {
  Millis t0 = 0;
  Millis t1 = 0;
  std::string kind;
};

class MonitorService {
 public:
  explicit MonitorService(ServiceConfig config);
  ~MonitorService();
  MonitorService(const MonitorService&) = delete;
  MonitorService& operator=(const MonitorService&) = delete;

  /// Decode, persist, re-validate, alert, stream. Rejected frames are counted
  /// by reason and never stored.
  IngestResult ingest(std::span<const std::uint8_t> frame);

  void register_patient(const std::string& patient_id);

  /// Throws Error("UnknownPatient").
  LatestView query_latest(const std::string& patient_id) const;
  std::vector<FeedRecord> query_range(const std::string& patient_id, const RangeQuery& q) const;

  std::vector<AlertRecord> alerts(bool active_only) const;
  /// Writes the outbox message and fires the webhook. Only Red events are
  /// dispatched; Green events return an empty delivery record.
  std::map<std::string, vitals::Delivery> dispatch_alert(const AlertEvent& event);
  /// Throws Error("UnknownAlert") or Error("AlreadyAcknowledged"). Returns
  /// the patient's status after the acknowledgment.
  Severity acknowledge(const std::string& alert_id);

  std::map<std::string, std::size_t> rejection_counts() const;
  std::size_t accepted_count() const;

  EventStream& stream() { return stream_; }

  void set_drive_console(DriveConsole* console);
  DriveConsole* drive_console() const;

  /// Blocks until queued webhook deliveries are finished.
  void wait_for_deliveries();

  const ServiceConfig& config() const { return config_; }

 private:
  struct PatientState {
    ChannelStore store;
    std::set<vitals::AlertKind> active_episodes;
  };
  struct DeviceState {
    std::optional<std::uint32_t> last_seq;
  };

  void load_from_disk();
  std::vector<AlertEvent> revalidate(PatientState& p, const std::string& patient_id,
                                     const FeedRecord& r, bool raise);
  std::string next_alert_id();
  Severity status_locked(const std::string& patient_id) const;
  void persist_line(const std::filesystem::path& file, const json& line);
  vitals::Delivery write_outbox(const AlertEvent& event);
  vitals::Delivery post_webhook(const AlertEvent& event);
  void record_delivery(const std::string& alert_id, const std::string& channel,
                       const vitals::Delivery& d);
  void webhook_worker(std::stop_token stop);
  Millis wall_now() const;

  ServiceConfig config_;
  mutable std::shared_mutex mu_;
  std::map<std::string, PatientState> patients_;
  std::map<std::uint64_t, DeviceState> devices_;
  std::vector<AlertRecord> alerts_;
  std::map<std::string, std::size_t> rejections_;
  std::size_t accepted_ = 0;
  std::uint64_t alert_counter_ = 0;
  EventStream stream_;
  DriveConsole* console_ = nullptr;
  std::mutex ingest_mu_;

  std::mutex webhook_mu_;
  std::condition_variable_any webhook_cv_;
  std::deque<AlertEvent> webhook_queue_;
  std::size_t webhook_in_flight_ = 0;
  std::jthread webhook_thread_;
};

}  // namespace wheelsim::monitor
