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

// Byte-wise Shamir secret sharing over GF(2^8) with the AES reduction
// polynomial x^8 + x^4 + x^3 + x + 1. Each secret byte is the constant term
// of its own random polynomial of degree t-1; share j holds the evaluations
// at x = j.

#include <cstdint>
#include <span>
#include <vector>

#include "dtrust/canon/bytes.h"

namespace dtrust::demoapp {

namespace gf256 {

uint8_t mul(uint8_t a, uint8_t b);
// Throws Error for 0.
uint8_t inv(uint8_t a);
inline uint8_t add(uint8_t a, uint8_t b) { return a ^ b; }

}  // namespace gf256

class BadParams : public Error {
 public:
  using Error::Error;
};

class BadShares : public Error {
 public:
  using Error::Error;
};

class InsufficientShares : public Error {
 public:
  using Error::Error;
};

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<uint8_t> out) = 0;
};

// Cryptographically secure randomness from the operating system.
class SystemRandom : public RandomSource {
 public:
  void fill(std::span<uint8_t> out) override;
};

struct Share {
  uint8_t x = 0;
  uint8_t t = 0;
  uint8_t n = 0;
  Bytes y;

  // Canonical encoding: tag Share, fields [x, t, n, y].
  Bytes encode() const;
  // Throws DecodeError, including for out-of-range parameters.
  static Share decode(ByteView in);

  bool operator==(const Share&) const = default;
};

// Requires 1 <= t <= n <= 255 and a nonempty secret (BadParams otherwise).
// Draws len * (t - 1) random bytes; the coefficient of x^j for secret byte i
// is byte i * (t - 1) + (j - 1).
std::vector<Share> split(ByteView secret, unsigned t, unsigned n, RandomSource& rng);

// Interpolates at x = 0 from the first t shares. Throws InsufficientShares
// with fewer than t shares, BadShares for duplicate or out-of-range x or
// inconsistent parameters and lengths.
Bytes recover(std::span<const Share> shares);

}  // namespace dtrust::demoapp
