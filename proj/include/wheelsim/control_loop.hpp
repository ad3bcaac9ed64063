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

#include <functional>
#include <istream>
#include <optional>
#include <vector>

#include "wheelsim/arbitration.hpp"

namespace wheelsim::arbitration {

struct TickOutput {
  Millis t_ms = 0;
  ModeId mode = ModeId::Stop;
  MotionCommand command;
  bool operator==(const TickOutput&) const = default;
};

enum class PollStatus { Ready, Missing, Exhausted };

struct Poll {
  PollStatus status = PollStatus::Exhausted;
  ControlInputs inputs;

  static Poll ready(ControlInputs in) { return {PollStatus::Ready, std::move(in)}; }
  static Poll missing() { return {PollStatus::Missing, {}}; }
  static Poll exhausted() { return {PollStatus::Exhausted, {}}; }
};

/// Supplies one snapshot per tick. Returning Exhausted ends the loop.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual Poll poll(Millis now) = 0;
};

/// Replays a JSON-Lines trace: one ControlInputs object per line, one line
/// per tick. A `null` line is a missing snapshot.
class JsonlTraceSource : public InputSource {
 public:
  explicit JsonlTraceSource(std::istream& in);
  Poll poll(Millis now) override;

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

/// Replays an in-memory list of snapshots (nullopt = missing).
class VectorSource : public InputSource {
 public:
  explicit VectorSource(std::vector<std::optional<ControlInputs>> snapshots)
      : snapshots_(std::move(snapshots)) {}
  Poll poll(Millis now) override;

 private:
  std::vector<std::optional<ControlInputs>> snapshots_;
  std::size_t next_ = 0;
};

struct PeriodStats {
  std::size_t ticks = 0;  // emissions; periods are ticks - 1
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  double max_ms = 0.0;
};

/// Accumulates tick-to-tick periods (Welford).
class PeriodMeter {
 public:
  void add(double period_ms);
  PeriodStats stats() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double max_ = 0.0;
};

struct LoopOptions {
  bool realtime = false;
  /// Stop after this much simulated time even if the source has more.
  std::optional<Millis> duration_ms;
  ArbitrationConfig config;
};

/// Fixed 20 ms control loop. Owns its ArbitrationState. A missing snapshot
/// repeats the previous one for a single tick; a second consecutive miss
/// degrades to Stop.
class ControlLoop {
 public:
  using Sink = std::function<void(const TickOutput&)>;

  explicit ControlLoop(LoopOptions options = {}, ArbitrationState initial = {});

  /// Runs one tick at the loop's current time, then advances the clock.
  TickOutput step(const std::optional<ControlInputs>& snapshot);

  /// Drives the loop from `source` until exhaustion or the duration limit.
  /// Returns period statistics: wall-clock in realtime mode, simulated
  /// otherwise.
  PeriodStats run(InputSource& source, const Sink& sink);

  Millis now() const { return now_; }
  const ArbitrationState& state() const { return state_; }
  ArbitrationState& mutable_state() { return state_; }

 private:
  LoopOptions options_;
  ArbitrationState state_;
  Millis now_ = 0;
  std::optional<ControlInputs> previous_;
  int consecutive_misses_ = 0;
};

}  // namespace wheelsim::arbitration
