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

#include "wheelsim/telemetry.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace wheelsim::telemetry {
namespace {

template <typename T>
void put_le(std::uint8_t* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* src) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(src[i]) << (8 * i);
  return value;
}

std::array<std::uint8_t, kHeaderSize> make_header(std::uint64_t device_id, std::uint32_t seq,
                                                  std::uint16_t payload_len) {
  std::array<std::uint8_t, kHeaderSize> h{};
  h[0] = kMagic0;
  h[1] = kMagic1;
  h[2] = kVersion;
  put_le(h.data() + 3, device_id);
  put_le(h.data() + 11, seq);
  put_le(h.data() + 15, payload_len);
  return h;
}

int binary_flag(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw Error("MalformedPayload", std::string(key) + " must be 0 or 1");
  const auto n = v.get<std::int64_t>();
  if (n != 0 && n != 1) throw Error("MalformedPayload", std::string(key) + " must be 0 or 1");
  return static_cast<int>(n);
}

}  // namespace

void to_json(json& j, const FeedRecord& r) {
  j = json{{"t", r.t},
           {"hr", r.hr},
           {"spo2", r.spo2},
           {"temp", r.temp},
           {"fall", r.fall},
           {"convulsion", r.convulsion},
           {"mode", r.mode},
           {"pose", {{"x", r.pose.x}, {"y", r.pose.y}, {"heading", r.pose.heading}}}};
}

void from_json(const json& j, FeedRecord& r) {
  try {
    r.t = j.at("t").get<Millis>();
    r.hr = j.at("hr").get<double>();
    r.spo2 = j.at("spo2").get<double>();
    r.temp = j.at("temp").get<double>();
    r.fall = binary_flag(j, "fall");
    r.convulsion = binary_flag(j, "convulsion");
    r.mode = j.at("mode").get<ModeId>();
    const auto& pose = j.at("pose");
    r.pose = {pose.at("x").get<double>(), pose.at("y").get<double>(),
              pose.at("heading").get<double>()};
  } catch (const Error& e) {
    throw Error("MalformedPayload", e.what());
  } catch (const json::exception& e) {
    throw Error("MalformedPayload", e.what());
  }
}

std::string canonical_payload(const FeedRecord& r) { return json(r).dump(); }

Bytes seal_frame(std::span<const std::uint8_t> payload, const Key& key, std::uint64_t device_id,
                 std::uint32_t seq) {
  if (payload.size() > kMaxPayload) throw Error("MalformedPayload", "payload exceeds 65535 bytes");
  const auto header = make_header(device_id, seq, static_cast<std::uint16_t>(payload.size()));
  const std::span<const std::uint8_t> nonce(header.data() + 3, kNonceSize);
  Bytes sealed = ccm_seal(key, nonce, header, payload, kTagSize);

  Bytes frame(frame_size(payload.size()));
  std::copy(header.begin(), header.end(), frame.begin());
  std::copy(sealed.begin(), sealed.end(), frame.begin() + kHeaderSize);
  return frame;
}

FrameHeader peek_header(std::span<const std::uint8_t> frame) {
  if (frame.size() < 3 || frame[0] != kMagic0 || frame[1] != kMagic1 || frame[2] != kVersion) {
    throw Error("BadMagic", "not a version-1 telemetry frame");
  }
  if (frame.size() < kHeaderSize) throw Error("AuthFailure", "truncated frame header");
  return {get_le<std::uint64_t>(frame.data() + 3), get_le<std::uint32_t>(frame.data() + 11),
          get_le<std::uint16_t>(frame.data() + 15)};
}

OpenedFrame open_frame(std::span<const std::uint8_t> frame, const Key& key,
                       std::optional<std::uint32_t> last_seq) {
  const FrameHeader header = peek_header(frame);
  // A length field that disagrees with the frame is indistinguishable from
  // tampering with the authenticated header.
  if (frame.size() != frame_size(header.payload_len)) {
    throw Error("AuthFailure", "frame length does not match payload_len");
  }
  const auto header_bytes = frame.first(kHeaderSize);
  const auto nonce = frame.subspan(3, kNonceSize);
  const auto ciphertext = frame.subspan(kHeaderSize, header.payload_len);
  const auto tag = frame.last(kTagSize);

  auto plaintext = ccm_open(key, nonce, header_bytes, ciphertext, tag);
  if (!plaintext) throw Error("AuthFailure", "frame failed authentication");
  if (last_seq && header.seq <= *last_seq) {
    throw Error("Replay", "stale sequence number " + std::to_string(header.seq));
  }
  return {header, std::move(*plaintext)};
}

Bytes encode_frame(const FeedRecord& record, const Key& key, std::uint64_t device_id,
                   std::uint32_t seq) {
  const std::string payload = canonical_payload(record);
  return seal_frame({reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()}, key,
                    device_id, seq);
}

DecodedFrame decode_frame(std::span<const std::uint8_t> frame, const Key& key,
                          std::optional<std::uint32_t> last_seq) {
  OpenedFrame opened = open_frame(frame, key, last_seq);
  json j;
  try {
    j = json::parse(opened.payload.begin(), opened.payload.end());
  } catch (const json::exception& e) {
    throw Error("MalformedPayload", e.what());
  }
  return {opened.header, j.get<FeedRecord>()};
}

Bytes FrameEncoder::encode(const FeedRecord& record, std::uint32_t seq) {
  if (last_seq_ && seq <= *last_seq_) {
    throw Error("SeqReuse", "sequence number " + std::to_string(seq) + " already used");
  }
  Bytes frame = encode_frame(record, key_, device_id_, seq);
  last_seq_ = seq;
  return frame;
}

Bytes FrameEncoder::encode_next(const FeedRecord& record) {
  const std::uint32_t seq = last_seq_ ? *last_seq_ + 1 : 1;
  if (last_seq_ && seq == 0) throw Error("SeqReuse", "sequence space exhausted");
  return encode(record, seq);
}

std::string patient_id_for(std::uint64_t device_id) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(device_id));
  return buf;
}

}  // namespace wheelsim::telemetry
