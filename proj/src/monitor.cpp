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

#include "wheelsim/monitor.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace wheelsim::monitor {

namespace fs = std::filesystem;
using vitals::AlertKind;
using vitals::Delivery;

namespace {

constexpr const char* kAlertLog = "alerts.jsonl";

std::tm utc_tm(Millis unix_ms) {
  const std::time_t secs = static_cast<std::time_t>(unix_ms >= 0 ? unix_ms / 1000 : (unix_ms - 999) / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return tm;
}

std::string rfc2822_date(Millis unix_ms) {
  static const char* kDays[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
  static const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  const std::tm tm = utc_tm(unix_ms);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s, %02d %s %04d %02d:%02d:%02d +0000", kDays[tm.tm_wday],
                tm.tm_mday, kMonths[tm.tm_mon], tm.tm_year + 1900, tm.tm_hour, tm.tm_min,
                tm.tm_sec);
  return buf;
}

std::string iso_utc(Millis unix_ms) {
  const std::tm tm = utc_tm(unix_ms);
  const long ms = static_cast<long>(((unix_ms % 1000) + 1000) % 1000);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d.%03ld UTC", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
  return buf;
}

std::string format_value(AlertKind kind, double value) {
  char buf[64];
  switch (kind) {
    case AlertKind::HeartAttack: std::snprintf(buf, sizeof buf, "%.1f bpm", value); break;
    case AlertKind::TempHigh:
    case AlertKind::TempLow: std::snprintf(buf, sizeof buf, "%.2f C", value); break;
    case AlertKind::SpO2Low: std::snprintf(buf, sizeof buf, "%.1f %%", value); break;
    default: std::snprintf(buf, sizeof buf, "%g", value); break;
  }
  return buf;
}

bool valid_kind(const std::string& kind) {
  return kind == "hr" || kind == "spo2" || kind == "temp" || kind == "fall" ||
         kind == "convulsion";
}

json delivery_json(const Delivery& d) {
  return {{"ok", d.ok}, {"attempts", d.attempts}, {"detail", d.detail}};
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<json> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !events_.empty() || closed_; });
  if (events_.empty()) return std::nullopt;
  json e = std::move(events_.front());
  events_.pop_front();
  return e;
}

std::vector<json> Subscription::drain() {
  std::lock_guard lock(mu_);
  std::vector<json> out(std::make_move_iterator(events_.begin()),
                        std::make_move_iterator(events_.end()));
  events_.clear();
  return out;
}

bool Subscription::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

bool Subscription::offer(const json& event) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return false;
    if (events_.size() >= capacity_) {
      dropped_ = true;
      closed_ = true;
      events_.clear();
    } else {
      events_.push_back(event);
    }
  }
  cv_.notify_all();
  return !dropped();
}

std::shared_ptr<Subscription> EventStream::subscribe(std::size_t capacity) {
  auto sub = std::make_shared<Subscription>(std::max<std::size_t>(capacity, 1));
  std::lock_guard lock(mu_);
  subscribers_.push_back(sub);
  return sub;
}

void EventStream::publish(const json& event) {
  std::lock_guard lock(mu_);
  std::erase_if(subscribers_, [&](const auto& sub) { return !sub->offer(event); });
}

std::size_t EventStream::subscriber_count() const {
  std::lock_guard lock(mu_);
  return subscribers_.size();
}

void EventStream::close_all() {
  std::lock_guard lock(mu_);
  for (auto& sub : subscribers_) sub->close();
  subscribers_.clear();
}

// ---------------------------------------------------------------------------

void ChannelStore::append(const FeedRecord& r) {
  records_.push_back(r);
  const bool newer = !newest_index_ || r.t >= records_[*newest_index_].t;
  if (!newer) return;
  newest_index_ = records_.size() - 1;
  latest_["hr"] = {r.hr, r.t};
  latest_["spo2"] = {r.spo2, r.t};
  latest_["temp"] = {r.temp, r.t};
  latest_["fall"] = {static_cast<double>(r.fall), r.t};
  latest_["convulsion"] = {static_cast<double>(r.convulsion), r.t};
}

std::optional<FeedRecord> ChannelStore::newest() const {
  if (!newest_index_) return std::nullopt;
  return records_[*newest_index_];
}

void to_json(json& j, const LatestView& v) {
  json values = json::object();
  for (const auto& [kind, latest] : v.values) values[kind] = {{"value", latest.value}, {"t", latest.t}};
  j = json{{"patient_id", v.patient_id},
           {"status", std::string(vitals::to_string(v.status))},
           {"values", values},
           {"newest", v.newest ? json(*v.newest) : json(nullptr)},
           {"active_alerts", v.active_alerts}};
}

// ---------------------------------------------------------------------------

MonitorService::MonitorService(ServiceConfig config) : config_(std::move(config)) {
  config_.detectors.validate();
  if (!config_.sleep_ms) {
    config_.sleep_ms = [](Millis ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
  }
  if (!config_.webhook_post) config_.webhook_post = http_webhook_post;
  if (!config_.outbox_dir.empty()) fs::create_directories(config_.outbox_dir);
  load_from_disk();
  if (config_.async_webhook && !config_.webhook_url.empty()) {
    webhook_thread_ = std::jthread([this](std::stop_token stop) { webhook_worker(stop); });
  }
}

MonitorService::~MonitorService() {
  if (webhook_thread_.joinable()) {
    webhook_thread_.request_stop();
    webhook_cv_.notify_all();
    webhook_thread_.join();
  }
  stream_.close_all();
}

Millis MonitorService::wall_now() const {
  if (config_.clock) return config_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void MonitorService::persist_line(const fs::path& file, const json& line) {
  std::ofstream out(file, std::ios::app | std::ios::binary);
  if (!out) throw Error("StorageError", "cannot append to " + file.string());
  out << line.dump() << '\n';
  out.flush();
}

void MonitorService::load_from_disk() {
  if (config_.data_dir.empty()) return;
  fs::create_directories(config_.data_dir);

  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(config_.data_dir)) {
    if (entry.path().extension() == ".jsonl" && entry.path().filename() != kAlertLog) {
      logs.push_back(entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());

  for (const auto& path : logs) {
    const std::string patient_id = path.stem().string();
    PatientState& p = patients_[patient_id];
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      // A torn final line from an interrupted write is skipped.
      try {
        const json j = json::parse(line);
        const FeedRecord r = j.at("record").get<FeedRecord>();
        auto& dev = devices_[j.at("device_id").get<std::uint64_t>()];
        const auto seq = j.at("seq").get<std::uint32_t>();
        if (!dev.last_seq || seq > *dev.last_seq) dev.last_seq = seq;
        p.store.append(r);
        revalidate(p, patient_id, r, false);
        ++accepted_;
      } catch (const std::exception&) {
      }
    }
  }

  std::ifstream in(config_.data_dir / kAlertLog);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string op = j.at("op").get<std::string>();
      if (op == "raise") {
        alerts_.push_back({j.at("alert").get<AlertEvent>(), false});
        ++alert_counter_;
      } else {
        const std::string id = j.at("id").get<std::string>();
        auto it = std::find_if(alerts_.begin(), alerts_.end(),
                               [&](const AlertRecord& a) { return a.event.id == id; });
        if (it == alerts_.end()) continue;
        if (op == "ack") {
          it->acknowledged = true;
        } else if (op == "delivery") {
          const json& d = j.at("delivery");
          it->event.delivered[j.at("channel").get<std::string>()] = {
              d.at("ok").get<bool>(), d.at("attempts").get<int>(),
              d.value("detail", std::string())};
        }
      }
    } catch (const std::exception&) {
    }
  }
}

void MonitorService::register_patient(const std::string& patient_id) {
  std::unique_lock lock(mu_);
  if (patients_.count(patient_id)) return;
  patients_[patient_id];
  if (!config_.data_dir.empty()) {
    std::ofstream touch(config_.data_dir / (patient_id + ".jsonl"), std::ios::app);
  }
}

std::string MonitorService::next_alert_id() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "A%06llu", static_cast<unsigned long long>(++alert_counter_));
  return buf;
}

std::vector<AlertEvent> MonitorService::revalidate(PatientState& p, const std::string& patient_id,
                                                   const FeedRecord& r, bool raise) {
  const auto& cfg = config_.detectors;
  std::vector<std::pair<AlertKind, double>> present;
  if (vitals::detect_heart_attack(r.hr, cfg)) present.emplace_back(AlertKind::HeartAttack, r.hr);
  switch (vitals::check_temperature(r.temp, cfg)) {
    case vitals::TempStatus::TempHigh: present.emplace_back(AlertKind::TempHigh, r.temp); break;
    case vitals::TempStatus::TempLow: present.emplace_back(AlertKind::TempLow, r.temp); break;
    default: break;
  }
  if (vitals::check_spo2(r.spo2, cfg) == vitals::SpO2Status::SpO2Low) {
    present.emplace_back(AlertKind::SpO2Low, r.spo2);
  }
  if (r.fall) present.emplace_back(AlertKind::Fall, 1.0);
  if (r.convulsion) present.emplace_back(AlertKind::Convulsion, 1.0);

  std::vector<AlertEvent> raised;
  std::set<AlertKind> now_active;
  for (const auto& [kind, value] : present) {
    now_active.insert(kind);
    if (p.active_episodes.count(kind) || !raise) continue;
    AlertEvent e;
    e.id = next_alert_id();
    e.kind = kind;
    e.severity = Severity::Red;
    e.value = value;
    e.t = r.t;
    e.patient_id = patient_id;
    e.location = {r.pose.x, r.pose.y};
    raised.push_back(std::move(e));
  }
  p.active_episodes = std::move(now_active);
  return raised;
}

IngestResult MonitorService::ingest(std::span<const std::uint8_t> frame) {
  std::lock_guard serial(ingest_mu_);
  IngestResult result;

  telemetry::DecodedFrame decoded;
  try {
    const auto header = telemetry::peek_header(frame);
    std::optional<std::uint32_t> last_seq;
    {
      std::shared_lock lock(mu_);
      auto it = devices_.find(header.device_id);
      if (it != devices_.end()) last_seq = it->second.last_seq;
    }
    decoded = telemetry::decode_frame(frame, config_.key, last_seq);
  } catch (const Error& e) {
    std::unique_lock lock(mu_);
    ++rejections_[e.code()];
    result.reason = e.code();
    return result;
  }

  const std::string patient_id = telemetry::patient_id_for(decoded.header.device_id);
  if (!config_.data_dir.empty()) {
    persist_line(config_.data_dir / (patient_id + ".jsonl"),
                 {{"device_id", decoded.header.device_id},
                  {"seq", decoded.header.seq},
                  {"record", decoded.record}});
  }

  {
    std::unique_lock lock(mu_);
    devices_[decoded.header.device_id].last_seq = decoded.header.seq;
    PatientState& p = patients_[patient_id];
    p.store.append(decoded.record);
    result.alerts = revalidate(p, patient_id, decoded.record, true);
    for (const auto& a : result.alerts) {
      alerts_.push_back({a, false});
      if (!config_.data_dir.empty()) {
        persist_line(config_.data_dir / kAlertLog, {{"op", "raise"}, {"alert", a}});
      }
    }
    ++accepted_;
  }

  result.accepted = true;
  result.patient_id = patient_id;
  result.record = decoded.record;

  stream_.publish({{"type", "record"}, {"patient_id", patient_id}, {"record", decoded.record}});
  for (auto& a : result.alerts) a.delivered = dispatch_alert(a);
  return result;
}

Severity MonitorService::status_locked(const std::string& patient_id) const {
  for (const auto& a : alerts_) {
    if (a.event.patient_id == patient_id && !a.acknowledged && a.event.severity == Severity::Red) {
      return Severity::Red;
    }
  }
  return Severity::Green;
}

LatestView MonitorService::query_latest(const std::string& patient_id) const {
  std::shared_lock lock(mu_);
  auto it = patients_.find(patient_id);
  if (it == patients_.end()) throw Error("UnknownPatient", "no patient " + patient_id);
  LatestView v;
  v.patient_id = patient_id;
  v.values = it->second.store.latest();
  v.newest = it->second.store.newest();
  v.status = status_locked(patient_id);
  for (const auto& a : alerts_) {
    if (a.event.patient_id == patient_id && !a.acknowledged) v.active_alerts.push_back(a.event);
  }
  return v;
}

std::vector<FeedRecord> MonitorService::query_range(const std::string& patient_id,
                                                    const RangeQuery& q) const {
  if (!q.kind.empty() && !valid_kind(q.kind)) throw Error("BadRequest", "unknown kind " + q.kind);
  std::shared_lock lock(mu_);
  auto it = patients_.find(patient_id);
  if (it == patients_.end()) throw Error("UnknownPatient", "no patient " + patient_id);
  std::vector<FeedRecord> out;
  for (const auto& r : it->second.store.records()) {
    if (r.t >= q.t0 && r.t <= q.t1) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeedRecord& a, const FeedRecord& b) { return a.t < b.t; });
  return out;
}

std::vector<AlertRecord> MonitorService::alerts(bool active_only) const {
  std::shared_lock lock(mu_);
  std::vector<AlertRecord> out;
  for (const auto& a : alerts_) {
    if (!active_only || !a.acknowledged) out.push_back(a);
  }
  return out;
}

Severity MonitorService::acknowledge(const std::string& alert_id) {
  Severity status;
  std::string patient_id;
  {
    std::unique_lock lock(mu_);
    auto it = std::find_if(alerts_.begin(), alerts_.end(),
                           [&](const AlertRecord& a) { return a.event.id == alert_id; });
    if (it == alerts_.end()) throw Error("UnknownAlert", "no alert " + alert_id);
    if (it->acknowledged) throw Error("AlreadyAcknowledged", alert_id + " already acknowledged");
    it->acknowledged = true;
    patient_id = it->event.patient_id;
    if (!config_.data_dir.empty()) {
      persist_line(config_.data_dir / kAlertLog, {{"op", "ack"}, {"id", alert_id}});
    }
    status = status_locked(patient_id);
  }
  stream_.publish({{"type", "ack"},
                   {"id", alert_id},
                   {"patient_id", patient_id},
                   {"status", std::string(vitals::to_string(status))}});
  return status;
}

void MonitorService::record_delivery(const std::string& alert_id, const std::string& channel,
                                     const Delivery& d) {
  std::unique_lock lock(mu_);
  for (auto& a : alerts_) {
    if (a.event.id != alert_id) continue;
    a.event.delivered[channel] = d;
    if (!config_.data_dir.empty()) {
      persist_line(config_.data_dir / kAlertLog, {{"op", "delivery"},
                                                  {"id", alert_id},
                                                  {"channel", channel},
                                                  {"delivery", delivery_json(d)}});
    }
    return;
  }
}

Delivery MonitorService::write_outbox(const AlertEvent& event) {
  const Millis event_unix = config_.time_base_ms + event.t;
  const Millis written = wall_now();
  const std::string kind(vitals::to_string(event.kind));

  std::ostringstream msg;
  msg << "From: " << config_.email_from << "\r\n"
      << "To: " << config_.email_to << "\r\n"
      << "Date: " << rfc2822_date(written) << "\r\n"
      << "Subject: [RED] " << kind << " alert for patient " << event.patient_id << "\r\n"
      << "X-Alert-Id: " << event.id << "\r\n"
      << "Content-Type: text/plain; charset=utf-8\r\n"
      << "\r\n"
      << "Alert: " << kind << "\r\n"
      << "Value: " << format_value(event.kind, event.value) << "\r\n"
      << "Patient: " << event.patient_id << "\r\n"
      << "Emergency time: " << iso_utc(event_unix) << "\r\n"
      << "Location: x=" << event.location.x << " m, y=" << event.location.y << " m\r\n";

  const fs::path final_path = config_.outbox_dir / (event.id + ".eml");
  const fs::path tmp_path = config_.outbox_dir / (event.id + ".eml.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) return {false, 1, "cannot open " + tmp_path.string()};
    out << msg.str();
    if (!out.flush()) return {false, 1, "write failed"};
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) return {false, 1, ec.message()};
  return {true, 1, final_path.filename().string()};
}

Delivery MonitorService::post_webhook(const AlertEvent& event) {
  json body = event;
  body.erase("delivered");
  const std::string payload = body.dump();
  Delivery d;
  Millis backoff = config_.webhook_backoff_ms;
  for (int attempt = 0; attempt <= config_.webhook_retries; ++attempt) {
    if (attempt > 0) {
      config_.sleep_ms(backoff);
      backoff *= 2;
    }
    ++d.attempts;
    if (config_.webhook_post(config_.webhook_url, payload)) {
      d.ok = true;
      d.detail = "delivered";
      return d;
    }
  }
  d.detail = "gave up after " + std::to_string(d.attempts) + " attempts";
  return d;
}

std::map<std::string, Delivery> MonitorService::dispatch_alert(const AlertEvent& event) {
  std::map<std::string, Delivery> delivered;
  if (event.severity != Severity::Red) return delivered;

  if (!config_.outbox_dir.empty()) {
    delivered["outbox"] = write_outbox(event);
    record_delivery(event.id, "outbox", delivered["outbox"]);
  }

  json alert_json = event;
  stream_.publish({{"type", "alert"}, {"alert", alert_json}});
  delivered["stream"] = {true, 1, std::to_string(stream_.subscriber_count()) + " subscribers"};
  record_delivery(event.id, "stream", delivered["stream"]);

  if (!config_.webhook_url.empty()) {
    if (config_.async_webhook) {
      {
        std::lock_guard lock(webhook_mu_);
        webhook_queue_.push_back(event);
      }
      webhook_cv_.notify_all();
      delivered["webhook"] = {false, 0, "queued"};
    } else {
      delivered["webhook"] = post_webhook(event);
      record_delivery(event.id, "webhook", delivered["webhook"]);
    }
  }
  return delivered;
}

void MonitorService::webhook_worker(std::stop_token stop) {
  while (true) {
    AlertEvent event;
    {
      std::unique_lock lock(webhook_mu_);
      if (!webhook_cv_.wait(lock, stop, [&] { return !webhook_queue_.empty(); })) return;
      event = std::move(webhook_queue_.front());
      webhook_queue_.pop_front();
      ++webhook_in_flight_;
    }
    const Delivery d = post_webhook(event);
    record_delivery(event.id, "webhook", d);
    {
      std::lock_guard lock(webhook_mu_);
      --webhook_in_flight_;
    }
    webhook_cv_.notify_all();
  }
}

void MonitorService::wait_for_deliveries() {
  std::unique_lock lock(webhook_mu_);
  if (!webhook_thread_.joinable()) return;
  webhook_cv_.wait(lock, [&] { return webhook_queue_.empty() && webhook_in_flight_ == 0; });
}

std::map<std::string, std::size_t> MonitorService::rejection_counts() const {
  std::shared_lock lock(mu_);
  return rejections_;
}

std::size_t MonitorService::accepted_count() const {
  std::shared_lock lock(mu_);
  return accepted_;
}

void MonitorService::set_drive_console(DriveConsole* console) {
  std::unique_lock lock(mu_);
  console_ = console;
}

DriveConsole* MonitorService::drive_console() const {
  std::shared_lock lock(mu_);
  return console_;
}

}  // namespace wheelsim::monitor
