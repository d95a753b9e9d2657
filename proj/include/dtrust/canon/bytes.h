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

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtrust {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

// Root of the exception hierarchy thrown by every dtrust module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input bytes: truncated encodings, wrong tags, bad key lengths.
class DecodeError : public Error {
 public:
  using Error::Error;
};

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
  return std::string(b.begin(), b.end());
}

// Lowercase hex, as used in all human-readable output.
std::string to_hex(ByteView b);

// Accepts upper or lower case. Throws DecodeError on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

void append(Bytes& out, ByteView in);

void put_u64_be(Bytes& out, uint64_t v);
uint64_t get_u64_be(ByteView in);

}  // namespace dtrust
