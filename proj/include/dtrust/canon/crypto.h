// Copyright 2026 The dtrust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy of
// the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations under
// the License.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "dtrust/canon/bytes.h"

namespace dtrust {

// 32-byte SHA-256 output.
class Digest {
 public:
  static constexpr size_t kSize = 32;

  Digest() { bytes_.fill(0); }
  explicit Digest(const std::array<uint8_t, kSize>& b) : bytes_(b) {}

  // Throws DecodeError unless exactly 32 bytes.
  static Digest from_bytes(ByteView b);
  static Digest from_hex(std::string_view hex);
  static Digest zero() { return Digest(); }

  bool is_zero() const;
  std::string hex() const { return to_hex(bytes_); }
  ByteView view() const { return bytes_; }
  const std::array<uint8_t, kSize>& bytes() const { return bytes_; }

  auto operator<=>(const Digest&) const = default;

 private:
  std::array<uint8_t, kSize> bytes_;
};

Digest sha256(ByteView data);

class Sha256 {
 public:
  Sha256();
  Sha256& update(ByteView data);
  Digest finish();

 private:
  alignas(64) std::array<uint8_t, 128> state_;  // crypto_hash_sha256_state
};

class PublicKey {
 public:
  static constexpr size_t kSize = 32;

  PublicKey() { bytes_.fill(0); }
  static PublicKey from_bytes(ByteView b);
  static PublicKey from_hex(std::string_view hex);

  std::string hex() const { return to_hex(bytes_); }
  ByteView view() const { return bytes_; }

  auto operator<=>(const PublicKey&) const = default;

 private:
  std::array<uint8_t, kSize> bytes_;
};

class Signature {
 public:
  static constexpr size_t kSize = 64;

  Signature() { bytes_.fill(0); }
  static Signature from_bytes(ByteView b);
  static Signature from_hex(std::string_view hex);

  std::string hex() const { return to_hex(bytes_); }
  ByteView view() const { return bytes_; }
  std::array<uint8_t, kSize>& mutable_bytes() { return bytes_; }

  auto operator<=>(const Signature&) const = default;

 private:
  std::array<uint8_t, kSize> bytes_;
};

// Ed25519 signing key. Persisted as the 32-byte seed; the expanded key is
// derived once on construction.
class SigningKey {
 public:
  static constexpr size_t kSeedSize = 32;

  static SigningKey generate();
  static SigningKey from_seed(ByteView seed);

  const PublicKey& public_key() const { return public_key_; }
  ByteView seed() const { return {expanded_.data(), kSeedSize}; }

  Signature sign(ByteView msg) const;

 private:
  SigningKey() = default;
  std::array<uint8_t, 64> expanded_{};
  PublicKey public_key_;
};

bool verify(const PublicKey& pk, ByteView msg, const Signature& sig);

// Length-checked variant for untyped input. Throws DecodeError when pk or sig
// have the wrong length; never returns true for malformed input.
bool verify_raw(ByteView pk, ByteView msg, ByteView sig);

void random_bytes(std::span<uint8_t> out);

// Key files hold the raw 32 bytes hex-encoded with a trailing newline.
void write_key_file(const std::filesystem::path& path, ByteView key);
Bytes read_key_file(const std::filesystem::path& path);
SigningKey read_signing_key(const std::filesystem::path& path);
PublicKey read_public_key(const std::filesystem::path& path);

}  // namespace dtrust

template <>
struct std::hash<dtrust::Digest> {
  size_t operator()(const dtrust::Digest& d) const noexcept {
    size_t h = 0;
    for (size_t i = 0; i < sizeof(size_t); ++i) h = (h << 8) | d.bytes()[i];
    return h;
  }
};
