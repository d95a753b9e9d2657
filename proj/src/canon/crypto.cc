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

#include "dtrust/canon/crypto.h"

#include <sodium.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dtrust {

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error("libsodium initialization failed");
}

template <size_t N>
std::array<uint8_t, N> fixed(ByteView b, const char* what) {
  if (b.size() != N) {
    throw DecodeError(std::string(what) + ": expected " + std::to_string(N) + " bytes, got " +
                      std::to_string(b.size()));
  }
  std::array<uint8_t, N> out;
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

}  // namespace

Digest Digest::from_bytes(ByteView b) { return Digest(fixed<kSize>(b, "digest")); }

Digest Digest::from_hex(std::string_view hex) { return from_bytes(dtrust::from_hex(hex)); }

bool Digest::is_zero() const {
  return std::all_of(bytes_.begin(), bytes_.end(), [](uint8_t b) { return b == 0; });
}

Digest sha256(ByteView data) {
  ensure_sodium();
  std::array<uint8_t, Digest::kSize> out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return Digest(out);
}

Sha256::Sha256() {
  ensure_sodium();
  crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

Sha256& Sha256::update(ByteView data) {
  crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                            data.data(), data.size());
  return *this;
}

Digest Sha256::finish() {
  std::array<uint8_t, Digest::kSize> out;
  crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()), out.data());
  return Digest(out);
}

PublicKey PublicKey::from_bytes(ByteView b) {
  PublicKey pk;
  pk.bytes_ = fixed<kSize>(b, "public key");
  return pk;
}

PublicKey PublicKey::from_hex(std::string_view hex) { return from_bytes(dtrust::from_hex(hex)); }

Signature Signature::from_bytes(ByteView b) {
  Signature s;
  s.bytes_ = fixed<kSize>(b, "signature");
  return s;
}

Signature Signature::from_hex(std::string_view hex) { return from_bytes(dtrust::from_hex(hex)); }

SigningKey SigningKey::generate() {
  std::array<uint8_t, kSeedSize> seed;
  random_bytes(seed);
  SigningKey key = from_seed(seed);
  sodium_memzero(seed.data(), seed.size());
  return key;
}

SigningKey SigningKey::from_seed(ByteView seed) {
  ensure_sodium();
  auto s = fixed<kSeedSize>(seed, "secret key");
  SigningKey key;
  std::array<uint8_t, PublicKey::kSize> pk;
  crypto_sign_seed_keypair(pk.data(), key.expanded_.data(), s.data());
  key.public_key_ = PublicKey::from_bytes(pk);
  return key;
}

Signature SigningKey::sign(ByteView msg) const {
  std::array<uint8_t, Signature::kSize> sig;
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), expanded_.data());
  return Signature::from_bytes(sig);
}

bool verify(const PublicKey& pk, ByteView msg, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.view().data(), msg.data(), msg.size(),
                                     pk.view().data()) == 0;
}

bool verify_raw(ByteView pk, ByteView msg, ByteView sig) {
  return verify(PublicKey::from_bytes(pk), msg, Signature::from_bytes(sig));
}

void random_bytes(std::span<uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

void write_key_file(const std::filesystem::path& path, ByteView key) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write key file " + path.string());
  f << to_hex(key) << "\n";
  if (!f) throw Error("cannot write key file " + path.string());
}

Bytes read_key_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read key file " + path.string());
  std::string line;
  std::getline(f, line);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  Bytes key = from_hex(line);
  if (key.size() != 32) throw DecodeError("key file " + path.string() + " must hold 32 bytes");
  return key;
}

SigningKey read_signing_key(const std::filesystem::path& path) {
  return SigningKey::from_seed(read_key_file(path));
}

PublicKey read_public_key(const std::filesystem::path& path) {
  return PublicKey::from_bytes(read_key_file(path));
}

}  // namespace dtrust
