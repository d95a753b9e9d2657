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

// Canonical byte encoding. Every signed or hashed object in the system is
// serialized as:
//
//   tag (1 byte) || field_1 || ... || field_k
//
// with fields in a fixed, per-tag order. Integers are unsigned 64-bit
// big-endian, digests are 32 raw bytes, and variable-length byte strings are
// an 8-byte big-endian length followed by the raw bytes. There are no
// optional fields.

#include <cstdint>
#include <span>
#include <variant>

#include "dtrust/canon/bytes.h"
#include "dtrust/canon/crypto.h"

namespace dtrust {

enum class Tag : uint8_t {
  kLogEntry = 0x01,
  kSignedHead = 0x02,
  kEndorsement = 0x03,
  kAttestationDoc = 0x04,
  kUpdate = 0x05,
  kEquivocationProof = 0x06,
  kDigestMismatchProof = 0x07,
  kShare = 0x08,
  kBackendIdentity = 0x09,
  kMisbehaviorProof = 0x0a,
  kPinStore = 0x0b,
  kKvPut = 0x0c,
  kKvDelete = 0x0d,
  kPublishedRelease = 0x0e,
  kHeadRecord = 0x0f,

  // Wire protocol frames.
  kStatusRequest = 0x20,
  kStatusResponse = 0x21,
  kUpdateRequest = 0x22,
  kUpdateResponse = 0x23,
  kAppRequest = 0x24,
  kAppResponse = 0x25,
  kIdentityRequest = 0x26,
  kIdentityResponse = 0x27,
  kErrorResponse = 0x2f,
};

using Field = std::variant<uint64_t, Digest, Bytes>;

Bytes encode(uint8_t tag, std::span<const Field> fields);

class Encoder {
 public:
  explicit Encoder(Tag tag) : Encoder(static_cast<uint8_t>(tag)) {}
  explicit Encoder(uint8_t tag) { out_.push_back(tag); }

  Encoder& u64(uint64_t v);
  Encoder& digest(const Digest& d);
  // Fixed 32-byte raw field (nonces, keys) without a length prefix.
  Encoder& raw32(ByteView b);
  Encoder& bytes(ByteView b);
  Encoder& bytes(std::string_view s) { return bytes(as_bytes(s)); }
  // A nested list is a u64 count followed by each element as a byte string.
  Encoder& list(std::span<const Bytes> items);

  const Bytes& view() const { return out_; }
  Bytes finish() { return std::move(out_); }

 private:
  Bytes out_;
};

// Reads fields back in declaration order. All accessors throw DecodeError on
// truncation; finish() throws if trailing bytes remain.
class Decoder {
 public:
  Decoder(ByteView in, Tag expected) : Decoder(in, static_cast<uint8_t>(expected)) {}
  Decoder(ByteView in, uint8_t expected);

  static uint8_t peek_tag(ByteView in);

  uint64_t u64();
  Digest digest();
  std::array<uint8_t, 32> raw32();
  Bytes bytes();
  std::string string();
  std::vector<Bytes> list();

  size_t remaining() const { return in_.size() - pos_; }
  void finish() const;

 private:
  ByteView take(size_t n);

  ByteView in_;
  size_t pos_ = 1;
};

}  // namespace dtrust
