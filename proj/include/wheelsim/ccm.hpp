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

// AES-128-CCM (NIST SP 800-38C) over OpenSSL's EVP interface.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wheelsim::telemetry {

using Bytes = std::vector<std::uint8_t>;
using Key = std::array<std::uint8_t, 16>;

/// Returns ciphertext followed by a `tag_len`-byte tag.
Bytes ccm_seal(const Key& key, std::span<const std::uint8_t> nonce,
               std::span<const std::uint8_t> aad, std::span<const std::uint8_t> plaintext,
               std::size_t tag_len);

/// Returns the plaintext, or nullopt when authentication fails.
std::optional<Bytes> ccm_open(const Key& key, std::span<const std::uint8_t> nonce,
                              std::span<const std::uint8_t> aad,
                              std::span<const std::uint8_t> ciphertext,
                              std::span<const std::uint8_t> tag);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws Error("ParseError") on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

/// Exactly 32 hex characters (surrounding whitespace ignored).
Key parse_key_hex(std::string_view hex);
Key load_key_file(const std::filesystem::path& path);

}  // namespace wheelsim::telemetry
