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

// Telemetry frame format.
//
//   offset  size  field
//   0       2     magic 0xA5 0x5A
//   2       1     version (1)
//   3       8     device_id, little-endian
//   11      4     seq, little-endian unsigned
//   15      2     payload_len, little-endian
//   17      n     ciphertext (AES-128-CCM)
//   17+n    8     CCM tag
//
// The nonce is bytes 3..15 of the header (device_id || seq, 12 bytes) and
// the whole 17-byte header is authenticated as associated data. The
// plaintext is the FeedRecord as compact JSON with sorted keys.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "wheelsim/ccm.hpp"
#include "wheelsim/json.hpp"
#include "wheelsim/types.hpp"

namespace wheelsim::telemetry {

inline constexpr std::uint8_t kMagic0 = 0xA5;
inline constexpr std::uint8_t kMagic1 = 0x5A;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 17;
inline constexpr std::size_t kTagSize = 8;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kMaxPayload = 0xFFFF;

constexpr std::size_t frame_size(std::size_t payload_len) {
  return kHeaderSize + payload_len + kTagSize;
}

struct Pose {
  double x = 0.0;  // m
  double y = 0.0;
  double heading = 0.0;  // rad
  bool operator==(const Pose&) const = default;
};

struct FeedRecord {
  Millis t = 0;
  double hr = 0.0;
  double spo2 = 0.0;
  double temp = 0.0;
  int fall = 0;        // 0 stable, 1 fall detected
  int convulsion = 0;  // 0 or 1
  ModeId mode = ModeId::Stop;
  Pose pose;
  bool operator==(const FeedRecord&) const = default;
};

void to_json(json& j, const FeedRecord& r);
/// Throws Error("MalformedPayload") on missing fields or non-binary flags.
void from_json(const json& j, FeedRecord& r);

/// Compact JSON, keys sorted, no whitespace.
std::string canonical_payload(const FeedRecord& r);

struct FrameHeader {
  std::uint64_t device_id = 0;
  std::uint32_t seq = 0;
  std::uint16_t payload_len = 0;
};

/// Seals raw payload bytes. Throws Error("MalformedPayload") above 65535 bytes.
Bytes seal_frame(std::span<const std::uint8_t> payload, const Key& key, std::uint64_t device_id,
                 std::uint32_t seq);

struct OpenedFrame {
  FrameHeader header;
  Bytes payload;
};

/// Checks magic/version, authenticates, then rejects seq <= last_seq.
/// Errors: BadMagic, AuthFailure, Replay.
OpenedFrame open_frame(std::span<const std::uint8_t> frame, const Key& key,
                       std::optional<std::uint32_t> last_seq = std::nullopt);

/// Parses the cleartext header without authenticating. Throws BadMagic.
FrameHeader peek_header(std::span<const std::uint8_t> frame);

Bytes encode_frame(const FeedRecord& record, const Key& key, std::uint64_t device_id,
                   std::uint32_t seq);

struct DecodedFrame {
  FrameHeader header;
  FeedRecord record;
};

/// open_frame plus payload parsing. Adds MalformedPayload.
DecodedFrame decode_frame(std::span<const std::uint8_t> frame, const Key& key,
                          std::optional<std::uint32_t> last_seq = std::nullopt);

/// Per-device encoder that refuses to reuse a sequence number (and therefore
/// a nonce) under its key.
class FrameEncoder {
 public:
  FrameEncoder(Key key, std::uint64_t device_id) : key_(key), device_id_(device_id) {}

  /// Throws Error("SeqReuse") unless seq is above every seq used so far.
  Bytes encode(const FeedRecord& record, std::uint32_t seq);
  Bytes encode_next(const FeedRecord& record);

  std::uint64_t device_id() const { return device_id_; }
  std::optional<std::uint32_t> last_seq() const { return last_seq_; }

 private:
  Key key_;
  std::uint64_t device_id_;
  std::optional<std::uint32_t> last_seq_;
};

/// Patient identifier derived from a device id: 16 lowercase hex digits.
std::string patient_id_for(std::uint64_t device_id);

}  // namespace wheelsim::telemetry
