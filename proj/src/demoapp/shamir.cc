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

#include "dtrust/demoapp/shamir.h"

#include <array>
#include <set>

#include "dtrust/canon/crypto.h"
#include "dtrust/canon/encoding.h"

namespace dtrust::demoapp {

namespace gf256 {

namespace {

struct Tables {
  std::array<uint8_t, 512> exp{};
  std::array<uint8_t, 256> log{};

  Tables() {
    // 3 generates the multiplicative group modulo 0x11b.
    unsigned v = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<uint8_t>(v);
      log[v] = static_cast<uint8_t>(i);
      v ^= v << 1;
      if (v & 0x100) v ^= 0x11b;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

uint8_t mul(uint8_t a, uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const Tables& t = tables();
  return t.exp[t.log[a] + t.log[b]];
}

uint8_t inv(uint8_t a) {
  if (a == 0) throw Error("zero has no inverse in GF(2^8)");
  const Tables& t = tables();
  return t.exp[255 - t.log[a]];
}

}  // namespace gf256

void SystemRandom::fill(std::span<uint8_t> out) { random_bytes(out); }

Bytes Share::encode() const {
  return Encoder(Tag::kShare).u64(x).u64(t).u64(n).bytes(y).finish();
}

Share Share::decode(ByteView in) {
  Decoder d(in, Tag::kShare);
  uint64_t x = d.u64(), t = d.u64(), n = d.u64();
  Bytes y = d.bytes();
  d.finish();
  if (n == 0 || n > 255 || t == 0 || t > n || x == 0 || x > n) {
    throw DecodeError("share parameters out of range");
  }
  return Share{static_cast<uint8_t>(x), static_cast<uint8_t>(t), static_cast<uint8_t>(n),
               std::move(y)};
}

std::vector<Share> split(ByteView secret, unsigned t, unsigned n, RandomSource& rng) {
  if (secret.empty()) throw BadParams("secret must be nonempty");
  if (t < 1 || t > n || n > 255) {
    throw BadParams("need 1 <= t <= n <= 255, got t=" + std::to_string(t) +
                    " n=" + std::to_string(n));
  }
  const size_t k = t - 1;
  Bytes coeffs(secret.size() * k);
  if (!coeffs.empty()) rng.fill(coeffs);

  std::vector<Share> shares(n);
  for (unsigned j = 0; j < n; ++j) {
    Share& s = shares[j];
    s.x = static_cast<uint8_t>(j + 1);
    s.t = static_cast<uint8_t>(t);
    s.n = static_cast<uint8_t>(n);
    s.y.resize(secret.size());
    for (size_t i = 0; i < secret.size(); ++i) {
      // Horner from the highest coefficient down to the secret byte.
      uint8_t acc = 0;
      for (size_t c = k; c >= 1; --c) acc = gf256::mul(acc, s.x) ^ coeffs[i * k + c - 1];
      s.y[i] = gf256::mul(acc, s.x) ^ secret[i];
    }
  }
  return shares;
}

Bytes recover(std::span<const Share> shares) {
  if (shares.empty()) throw InsufficientShares("no shares");
  const Share& first = shares.front();
  std::set<uint8_t> xs;
  for (const Share& s : shares) {
    if (s.t != first.t || s.n != first.n || s.y.size() != first.y.size()) {
      throw BadShares("shares disagree on parameters or length");
    }
    if (s.x == 0 || s.x > s.n) throw BadShares("share index out of range");
    if (!xs.insert(s.x).second) throw BadShares("duplicate share index " + std::to_string(s.x));
  }
  if (first.t == 0 || first.t > first.n) throw BadShares("invalid threshold");
  if (shares.size() < first.t) {
    throw InsufficientShares("need " + std::to_string(first.t) + " shares, got " +
                             std::to_string(shares.size()));
  }
  if (first.y.empty()) throw BadShares("empty share");

  auto used = shares.first(first.t);
  // Lagrange basis at zero: l_j = prod_{m != j} x_m / (x_m - x_j); in
  // characteristic 2 subtraction is XOR.
  std::vector<uint8_t> basis(used.size());
  for (size_t j = 0; j < used.size(); ++j) {
    uint8_t num = 1, den = 1;
    for (size_t m = 0; m < used.size(); ++m) {
      if (m == j) continue;
      num = gf256::mul(num, used[m].x);
      den = gf256::mul(den, used[m].x ^ used[j].x);
    }
    basis[j] = gf256::mul(num, gf256::inv(den));
  }
  Bytes secret(first.y.size(), 0);
  for (size_t i = 0; i < secret.size(); ++i) {
    uint8_t acc = 0;
    for (size_t j = 0; j < used.size(); ++j) acc ^= gf256::mul(basis[j], used[j].y[i]);
    secret[i] = acc;
  }
  return secret;
}

}  // namespace dtrust::demoapp
