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

#pragma once

#include <atomic>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "wheelsim/control_loop.hpp"
#include "wheelsim/telemetry.hpp"

namespace wheelsim::telemetry {

/// Carries sealed frames to the monitor. send() returns false when the link
/// is down; it must not block for long.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual bool send(std::span<const std::uint8_t> frame) = 0;
};

/// In-process transport that hands frames to a callback. The link can be
/// taken down to model outages.
class LoopbackTransport : public Transport {
 public:
  using Handler = std::function<void(std::span<const std::uint8_t>)>;
  explicit LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}

  bool send(std::span<const std::uint8_t> frame) override;
  void set_up(bool up) { up_ = up; }
  bool up() const { return up_; }

 private:
  Handler handler_;
  std::atomic<bool> up_{true};
};

/// POSTs frames to `<base_url>/ingest` as application/octet-stream.
class HttpTransport : public Transport {
 public:
  HttpTransport(std::string host, int port);
  bool send(std::span<const std::uint8_t> frame) override;

 private:
  std::string host_;
  int port_;
};

/// Bounded FIFO that drops its oldest entry on overflow. Producer calls are
/// O(1) under a short critical section.
class RecordQueue {
 public:
  explicit RecordQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(FeedRecord r);
  std::vector<FeedRecord> drain();
  /// Returns records to the front of the queue after a failed send, keeping
  /// the newest if they no longer fit.
  void requeue_front(std::vector<FeedRecord> records);

  std::size_t size() const;
  std::size_t dropped() const;
  std::size_t capacity() const { return capacity_; }

 private:
  void trim_locked();

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<FeedRecord> items_;
  std::size_t dropped_ = 0;
};

struct UploaderConfig {
  Millis cadence_ms = 1000;
  std::size_t capacity = 256;
  /// Coalesce every record queued during a cadence window into one.
  bool batch = false;

  static UploaderConfig live() { return {}; }
  static UploaderConfig batch_preset() { return {40'000, 256, true}; }
};

struct UploaderMetrics {
  std::size_t produced = 0;
  std::size_t sent = 0;
  std::size_t dropped = 0;
  std::size_t send_failures = 0;
  std::size_t buffered = 0;
};

/// Mean of vitals, max of flags, latest time/mode/pose.
FeedRecord coalesce(std::span<const FeedRecord> records);

/// Moves queued records to the transport at a fixed cadence. offer() is the
/// producer side (control loop); tick() is the consumer side, called either
/// from the simulation clock or from the background thread.
class Uploader {
 public:
  Uploader(FrameEncoder encoder, Transport& transport, UploaderConfig config = {});

  /// Queues a record. A full queue first attempts to send its backlog, so
  /// only records that still do not fit are evicted.
  void offer(const FeedRecord& r);
  /// Sends if a cadence boundary has been reached. Returns frames sent.
  std::size_t tick(Millis now);
  UploaderMetrics metrics() const;

 private:
  std::size_t flush();

  FrameEncoder encoder_;
  Transport& transport_;
  UploaderConfig config_;
  RecordQueue queue_;
  std::optional<Millis> next_send_;
  std::atomic<std::size_t> produced_{0};
  std::size_t sent_ = 0;
  std::size_t send_failures_ = 0;
  mutable std::mutex consumer_mu_;
};

/// Runs Uploader::tick on the wall clock in its own thread.
class UploaderThread {
 public:
  explicit UploaderThread(Uploader& uploader, Millis poll_ms = 10);
  ~UploaderThread();
  UploaderThread(const UploaderThread&) = delete;
  UploaderThread& operator=(const UploaderThread&) = delete;

 private:
  Uploader& uploader_;
  std::jthread worker_;
};

struct OverheadReport {
  double encrypt_us_mean = 0.0;
  double rtt_ms_mean = 0.0;
  std::size_t rtt_samples = 0;
  arbitration::PeriodStats loop;
  double reference_encrypt_overhead_us = 4.0;
  std::string note;
};

void to_json(json& j, const OverheadReport& r);

struct OverheadOptions {
  std::size_t encrypt_iterations = 2000;
  std::size_t rtt_iterations = 50;
  Millis loop_duration_ms = 2000;
  bool realtime_loop = true;
};

/// Times frame sealing, round trips through `round_trip` (which should send a
/// frame to the monitor and return whether it was accepted; may be empty),
/// and the control loop period.
OverheadReport measure_overheads(const OverheadOptions& options,
                                 const std::function<bool(std::span<const std::uint8_t>)>& round_trip);

}  // namespace wheelsim::telemetry
