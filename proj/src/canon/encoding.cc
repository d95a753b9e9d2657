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

#include "dtrust/canon/encoding.h"

#include <string>

namespace dtrust {

Bytes encode(uint8_t tag, std::span<const Field> fields) {
  Encoder enc(tag);
  for (const Field& f : fields) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, uint64_t>) {
            enc.u64(v);
          } else if constexpr (std::is_same_v<T, Digest>) {
            enc.digest(v);
          } else {
            enc.bytes(ByteView(v));
          }
        },
        f);
  }
  return enc.finish();
}

Encoder& Encoder::u64(uint64_t v) {
  put_u64_be(out_, v);
  return *this;
}

Encoder& Encoder::digest(const Digest& d) {
  append(out_, d.view());
  return *this;
}

Encoder& Encoder::raw32(ByteView b) {
  if (b.size() != 32) throw DecodeError("raw32 field must be 32 bytes");
  append(out_, b);
  return *this;
}

Encoder& Encoder::bytes(ByteView b) {
  put_u64_be(out_, b.size());
  append(out_, b);
  return *this;
}

Encoder& Encoder::list(std::span<const Bytes> items) {
  u64(items.size());
  for (const Bytes& item : items) bytes(ByteView(item));
  return *this;
}

Decoder::Decoder(ByteView in, uint8_t expected) : in_(in) {
  if (in.empty()) throw DecodeError("empty encoding");
  if (in[0] != expected) {
    throw DecodeError("unexpected tag 0x" + to_hex(in.first(1)) + ", want 0x" +
                      to_hex(ByteView(&expected, 1)));
  }
}

uint8_t Decoder::peek_tag(ByteView in) {
  if (in.empty()) throw DecodeError("empty encoding");
  return in[0];
}

ByteView Decoder::take(size_t n) {
  if (n > remaining()) throw DecodeError("truncated encoding");
  ByteView out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

uint64_t Decoder::u64() { return get_u64_be(take(8)); }

Digest Decoder::digest() { return Digest::from_bytes(take(Digest::kSize)); }

std::array<uint8_t, 32> Decoder::raw32() {
  ByteView b = take(32);
  std::array<uint8_t, 32> out;
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

Bytes Decoder::bytes() {
  uint64_t len = u64();
  if (len > remaining()) throw DecodeError("byte string length exceeds input");
  ByteView b = take(static_cast<size_t>(len));
  return Bytes(b.begin(), b.end());
}

std::string Decoder::string() {
  Bytes b = bytes();
  return std::string(b.begin(), b.end());
}

std::vector<Bytes> Decoder::list() {
  uint64_t count = u64();
  // Each element carries at least its 8-byte length.
  if (count > remaining() / 8) throw DecodeError("list count exceeds input");
  std::vector<Bytes> out;
  out.reserve(count);
  for (uint64_t i = 0; i < count; ++i) out.push_back(bytes());
  return out;
}

void Decoder::finish() const {
  if (remaining() != 0) {
    throw DecodeError(std::to_string(remaining()) + " trailing bytes after encoding");
  }
}

}  // namespace dtrust
