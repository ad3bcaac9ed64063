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

#include "wheelsim/ccm.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "wheelsim/types.hpp"

namespace wheelsim::telemetry {
namespace {

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx make_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  if (!ctx) throw Error("CryptoFailure", "EVP_CIPHER_CTX_new failed");
  return ctx;
}

void check(int rc, const char* what) {
  if (rc <= 0) throw Error("CryptoFailure", what);
}

// OpenSSL treats a null input pointer as a length/AAD call, so empty buffers
// are passed with a valid dummy address.
const std::uint8_t* data_or_dummy(std::span<const std::uint8_t> s) {
  static const std::uint8_t kDummy = 0;
  return s.empty() ? &kDummy : s.data();
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes ccm_seal(const Key& key, std::span<const std::uint8_t> nonce,
               std::span<const std::uint8_t> aad, std::span<const std::uint8_t> plaintext,
               std::size_t tag_len) {
  auto ctx = make_ctx();
  int len = 0;
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ccm(), nullptr, nullptr, nullptr), "init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, static_cast<int>(nonce.size()),
                            nullptr),
        "nonce length");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, static_cast<int>(tag_len), nullptr),
        "tag length");
  check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "key");
  check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, nullptr, static_cast<int>(plaintext.size())),
        "message length");
  if (!aad.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "aad");
  }

  Bytes out(plaintext.size() + tag_len);
  std::uint8_t scratch = 0;
  std::uint8_t* dst = plaintext.empty() ? &scratch : out.data();
  check(EVP_EncryptUpdate(ctx.get(), dst, &len, data_or_dummy(plaintext),
                          static_cast<int>(plaintext.size())),
        "encrypt");
  check(EVP_EncryptFinal_ex(ctx.get(), dst + len, &len), "final");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, static_cast<int>(tag_len),
                            out.data() + plaintext.size()),
        "get tag");
  return out;
}

std::optional<Bytes> ccm_open(const Key& key, std::span<const std::uint8_t> nonce,
                              std::span<const std::uint8_t> aad,
                              std::span<const std::uint8_t> ciphertext,
                              std::span<const std::uint8_t> tag) {
  auto ctx = make_ctx();
  int len = 0;
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_ccm(), nullptr, nullptr, nullptr), "init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, static_cast<int>(nonce.size()),
                            nullptr),
        "nonce length");
  Bytes tag_copy(tag.begin(), tag.end());
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, static_cast<int>(tag_copy.size()),
                            tag_copy.data()),
        "tag");
  check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "key");
  check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, nullptr, static_cast<int>(ciphertext.size())),
        "message length");
  if (!aad.empty()) {
    check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
          "aad");
  }
  Bytes out(ciphertext.size());
  std::uint8_t scratch = 0;
  std::uint8_t* dst = ciphertext.empty() ? &scratch : out.data();
  // For CCM the tag is verified inside this call.
  if (EVP_DecryptUpdate(ctx.get(), dst, &len, data_or_dummy(ciphertext),
                        static_cast<int>(ciphertext.size())) <= 0) {
    return std::nullopt;
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error("ParseError", "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error("ParseError", "invalid hex character");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

Key parse_key_hex(std::string_view hex) {
  const auto first = hex.find_first_not_of(" \t\r\n");
  const auto last = hex.find_last_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error("ParseError", "empty key");
  hex = hex.substr(first, last - first + 1);
  if (hex.size() != 32) throw Error("ParseError", "key must be 32 hex characters");
  const Bytes bytes = from_hex(hex);
  Key key{};
  std::copy(bytes.begin(), bytes.end(), key.begin());
  return key;
}

Key load_key_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoFailure", "cannot open key file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_hex(ss.str());
}

}  // namespace wheelsim::telemetry
