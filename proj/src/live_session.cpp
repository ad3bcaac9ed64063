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

#include <chrono>

#include "wheelsim/sim.hpp"

namespace wheelsim::sim {

namespace {
// Ticks between stream updates (5 -> 10 Hz).
constexpr int kPublishEvery = 5;
}  // namespace

LiveSession::LiveSession(WorldConfig cfg, monitor::MonitorService& service) : service_(service) {
  world_ = std::make_unique<World>(std::move(cfg), [this](std::span<const std::uint8_t> frame, Millis) {
    service_.ingest(frame);
  });
}

LiveSession::~LiveSession() { stop(); }

void LiveSession::start() {
  if (thread_.joinable()) return;
  thread_ = std::jthread([this](std::stop_token stop) { run(stop); });
}

void LiveSession::stop() {
  if (!thread_.joinable()) return;
  thread_.request_stop();
  thread_.join();
}

void LiveSession::run(std::stop_token stop) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  for (long n = 0; !stop.stop_requested(); ++n) {
    std::this_thread::sleep_until(start + std::chrono::milliseconds(n * arbitration::kTickMs));
    json update;
    {
      std::lock_guard lock(mu_);
      last_ = world_->tick();
      if (n % kPublishEvery == 0) update = state_locked();
    }
    if (!update.is_null()) {
      update["type"] = "tick";
      service_.stream().publish(update);
    }
  }
}

json LiveSession::state_locked() const {
  json out = last_.out;
  out["safe_halt"] = last_.safe_halt;
  out["policy"] = arbitration::policy_name(world_->arbitration_state().selected_policy);
  out["pose"] = {{"x", last_.pose.x}, {"y", last_.pose.y}, {"heading", last_.pose.heading}};
  return out;
}

json LiveSession::snapshot() const {
  std::lock_guard lock(mu_);
  return state_locked();
}

json LiveSession::drive(const json& intent) {
  std::lock_guard lock(mu_);
  if (intent.contains("event")) {
    // Scripted injection (hazards, physiology) from the operator console.
    const json& e = intent.at("event");
    world_->apply({world_->now(), e.at("type").get<std::string>(), e.value("params", json::object())});
    return state_locked();
  }
  if (world_->arbitration_state().safe_halt) {
    throw Error("SafeHaltActive", "safe halt active; clear it before driving");
  }
  const std::string modality = intent.value("modality", std::string());
  if (modality != "joystick" && modality != "voice" && modality != "gesture" && modality != "eog") {
    throw Error("BadRequest", "modality must be joystick, voice, gesture or eog");
  }
  json params = intent;
  params.erase("modality");
  try {
    world_->apply({world_->now(), modality, params});
  } catch (const Error& e) {
    throw Error("BadRequest", e.what());
  }
  return state_locked();
}

json LiveSession::set_mode(const json& request) {
  const auto policy = arbitration::parse_policy(request.value("policy", std::string()));
  if (!policy) throw Error("BadRequest", "policy must be auto or a modality name");
  std::lock_guard lock(mu_);
  world_->select_policy(*policy);
  return state_locked();
}

json LiveSession::clear_safe_halt() {
  std::lock_guard lock(mu_);
  world_->clear_safe_halt();
  return state_locked();
}

}  // namespace wheelsim::sim
