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

#include "wheelsim/control_loop.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include "wheelsim/json.hpp"

namespace wheelsim::arbitration {

JsonlTraceSource::JsonlTraceSource(std::istream& in) : in_(in) {}

Poll JsonlTraceSource::poll(Millis /*now*/) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("ParseError", "trace line " + std::to_string(line_no_) + ": " + e.what());
    }
    if (j.is_null()) return Poll::missing();
    return Poll::ready(j.get<ControlInputs>());
  }
  return Poll::exhausted();
}

Poll VectorSource::poll(Millis /*now*/) {
  if (next_ >= snapshots_.size()) return Poll::exhausted();
  const auto& snap = snapshots_[next_++];
  return snap ? Poll::ready(*snap) : Poll::missing();
}

void PeriodMeter::add(double period_ms) {
  ++n_;
  const double delta = period_ms - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (period_ms - mean_);
  max_ = std::max(max_, period_ms);
}

PeriodStats PeriodMeter::stats() const {
  PeriodStats s;
  s.ticks = n_;
  s.mean_ms = mean_;
  s.stddev_ms = n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0;
  s.max_ms = max_;
  return s;
}

ControlLoop::ControlLoop(LoopOptions options, ArbitrationState initial)
    : options_(std::move(options)), state_(std::move(initial)), now_(state_.last_tick_ms) {}

TickOutput ControlLoop::step(const std::optional<ControlInputs>& snapshot) {
  const Millis t = now_;
  now_ += kTickMs;

  std::optional<ControlInputs> effective;
  if (snapshot) {
    consecutive_misses_ = 0;
    effective = snapshot;
  } else if (++consecutive_misses_ == 1 && previous_) {
    effective = previous_;
  }

  if (!effective) {
    // Fail-safe: no fresh data for two ticks. Drop the debounce so the stick
    // has to dwell again once data returns.
    state_.joystick_debounce.first_seen_ms.reset();
    state_.last_tick_ms = std::max(state_.last_tick_ms, t);
    return {t, ModeId::Stop, MotionCommand::stop()};
  }

  ControlInputs in = *effective;
  in.timestamp = t;
  auto result = arbitrate(in, std::move(state_), options_.config);
  state_ = std::move(result.state);
  if (snapshot) previous_ = snapshot;
  return {t, result.mode, result.command};
}

PeriodStats ControlLoop::run(InputSource& source, const Sink& sink) {
  using Clock = std::chrono::steady_clock;
  PeriodMeter meter;
  const Millis start = now_;
  const auto wall_start = Clock::now();
  std::optional<Clock::time_point> last_wall;
  std::size_t emitted = 0;

  for (std::int64_t k = 0;; ++k) {
    if (options_.duration_ms && now_ - start >= *options_.duration_ms) break;
    if (options_.realtime) {
      std::this_thread::sleep_until(wall_start + std::chrono::milliseconds(k * kTickMs));
      const auto wall = Clock::now();
      if (last_wall) {
        meter.add(std::chrono::duration<double, std::milli>(wall - *last_wall).count());
      }
      last_wall = wall;
    } else if (k > 0) {
      meter.add(static_cast<double>(kTickMs));
    }

    Poll p = source.poll(now_);
    if (p.status == PollStatus::Exhausted) break;
    auto out = step(p.status == PollStatus::Ready ? std::optional<ControlInputs>(p.inputs)
                                                  : std::nullopt);
    ++emitted;
    if (sink) sink(out);
  }
  auto stats = meter.stats();
  stats.ticks = emitted;
  return stats;
}

}  // namespace wheelsim::arbitration
