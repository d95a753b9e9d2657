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

#include <gtest/gtest.h>
#include <openssl/sha.h>

#include <fstream>
#include <map>
#include <random>
#include <tuple>

#include "dtrust/canon/bytes.h"
#include "dtrust/canon/crypto.h"
#include "dtrust/canon/encoding.h"

namespace dtrust {
namespace {

// Hand-rolled big-endian encoder, written without the library's helpers.
Bytes oracle_encode_seq_digest(uint8_t tag, uint64_t seq, const std::array<uint8_t, 32>& d) {
  Bytes out;
  out.push_back(tag);
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>((seq >> (8 * i)) & 0xff));
  for (uint8_t b : d) out.push_back(b);
  return out;
}

TEST(Encode, ZeroIntegerIsNineBytes) {
  std::vector<Field> fields{uint64_t{0}};
  Bytes got = encode(0x01, fields);
  EXPECT_EQ(to_hex(got), "010000000000000000");
}

TEST(Encode, ByteStringIsLengthPrefixed) {
  std::vector<Field> fields{to_bytes("ab")};
  Bytes got = encode(0x01, fields);
  EXPECT_EQ(got.size(), 11u);
  EXPECT_EQ(to_hex(got), "0100000000000000026162");
}

TEST(Encode, MatchesIndependentEncoder) {
  std::array<uint8_t, 32> zero{};
  std::vector<Field> fields{uint64_t{1}, Digest::zero()};
  Bytes got = encode(0x02, fields);
  EXPECT_EQ(got.size(), 41u);
  EXPECT_EQ(got, oracle_encode_seq_digest(0x02, 1, zero));
  // Frozen across processes and platforms (value computed with Python hashlib).
  EXPECT_EQ(sha256(got).hex(), "facdadfa0b84aa902633281f3c6331cf6f53a5861f61c3abfe578d979cc3e503");
}

TEST(Encode, EncoderAndFieldListAgree) {
  Digest d = sha256(as_bytes("x"));
  Bytes a = Encoder(Tag::kLogEntry).u64(7).digest(d).bytes("hello").finish();
  std::vector<Field> fields{uint64_t{7}, d, to_bytes("hello")};
  EXPECT_EQ(a, encode(0x01, fields));
}

TEST(Decode, RoundTripAndTrailingBytes) {
  Bytes enc = Encoder(Tag::kShare).u64(3).bytes("abc").list(std::vector<Bytes>{Bytes{1}, Bytes{}}).finish();
  Decoder dec(enc, Tag::kShare);
  EXPECT_EQ(dec.u64(), 3u);
  EXPECT_EQ(dec.string(), "abc");
  auto items = dec.list();
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0], Bytes{1});
  EXPECT_TRUE(items[1].empty());
  EXPECT_NO_THROW(dec.finish());

  Bytes longer = enc;
  longer.push_back(0);
  Decoder dec2(longer, Tag::kShare);
  dec2.u64();
  dec2.bytes();
  dec2.list();
  EXPECT_THROW(dec2.finish(), DecodeError);
}

TEST(Decode, RejectsWrongTagAndTruncation) {
  Bytes enc = Encoder(Tag::kShare).bytes("abcdef").finish();
  EXPECT_THROW(Decoder(enc, Tag::kLogEntry), DecodeError);
  Bytes truncated(enc.begin(), enc.end() - 1);
  Decoder dec(truncated, Tag::kShare);
  EXPECT_THROW(dec.bytes(), DecodeError);
  // Absurd length prefix.
  Bytes bogus{0x08, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff};
  Decoder dec2(bogus, Tag::kShare);
  EXPECT_THROW(dec2.bytes(), DecodeError);
}

// Injectivity under a fixed schema [u64, bytes, bytes, digest]. Small value
// domains make near-collisions (field boundary shifts) common.
TEST(EncodeProperty, InjectiveOverRandomTuples) {
  std::mt19937_64 rng(12345);
  auto small_bytes = [&]() {
    Bytes b(rng() % 4);
    for (auto& v : b) v = static_cast<uint8_t>('a' + rng() % 2);
    return b;
  };
  using Tuple = std::tuple<uint64_t, Bytes, Bytes, Digest>;
  std::map<Bytes, Tuple> seen;
  std::array<Digest, 2> digests{Digest::zero(), sha256(as_bytes("d"))};
  int distinct_collisions = 0;
  for (int i = 0; i < 20000; ++i) {
    Tuple t{rng() % 3, small_bytes(), small_bytes(), digests[rng() % 2]};
    std::vector<Field> fields{std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)};
    Bytes enc = encode(0x09, fields);
    auto [it, inserted] = seen.emplace(enc, t);
    if (!inserted && it->second != t) ++distinct_collisions;
  }
  EXPECT_EQ(distinct_collisions, 0);
  EXPECT_GT(seen.size(), 500u);
}

TEST(Hash, StandardVectors) {
  EXPECT_EQ(sha256(ByteView()).hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256(as_bytes("abc")).hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, MatchesOpenSslOnLargeBuffer) {
  Bytes buf(1 << 20);
  random_bytes(buf);
  std::array<uint8_t, 32> oracle;
  SHA256(buf.data(), buf.size(), oracle.data());
  EXPECT_EQ(sha256(buf), Digest(oracle));

  Sha256 inc;
  inc.update(ByteView(buf).first(1000)).update(ByteView(buf).subspan(1000));
  EXPECT_EQ(inc.finish(), Digest(oracle));
}

TEST(Sign, RoundTripFlipAndWrongKey) {
  SigningKey key = SigningKey::generate();
  Bytes msg = Encoder(Tag::kUpdate).digest(sha256(as_bytes("app"))).u64(2).finish();
  Signature sig = key.sign(msg);
  EXPECT_TRUE(verify(key.public_key(), msg, sig));

  Bytes flipped = msg;
  flipped[5] ^= 0x01;
  EXPECT_FALSE(verify(key.public_key(), flipped, sig));

  SigningKey other = SigningKey::generate();
  EXPECT_FALSE(verify(other.public_key(), msg, sig));
}

TEST(Sign, DeterministicFromSeed) {
  Bytes seed(32, 0x42);
  SigningKey a = SigningKey::from_seed(seed);
  SigningKey b = SigningKey::from_seed(seed);
  EXPECT_EQ(a.public_key(), b.public_key());
  EXPECT_EQ(a.sign(as_bytes("m")), b.sign(as_bytes("m")));
}

TEST(Sign, MalformedLengthsAreDecodeErrors) {
  SigningKey key = SigningKey::generate();
  Signature sig = key.sign(as_bytes("m"));
  Bytes short_pk(31, 0);
  EXPECT_THROW(verify_raw(short_pk, as_bytes("m"), sig.view()), DecodeError);
  Bytes short_sig(63, 0);
  EXPECT_THROW(verify_raw(key.public_key().view(), as_bytes("m"), short_sig), DecodeError);
  EXPECT_THROW(SigningKey::from_seed(Bytes(16, 1)), DecodeError);
  EXPECT_TRUE(verify_raw(key.public_key().view(), as_bytes("m"), sig.view()));
}

TEST(SignProperty, BitFlipsNeverVerify) {
  std::mt19937_64 rng(7);
  SigningKey key = SigningKey::generate();
  for (int i = 0; i < 300; ++i) {
    Bytes msg(1 + rng() % 64);
    for (auto& b : msg) b = static_cast<uint8_t>(rng());
    Signature sig = key.sign(msg);
    Bytes pk(key.public_key().view().begin(), key.public_key().view().end());
    Bytes s(sig.view().begin(), sig.view().end());
    switch (i % 3) {
      case 0: msg[rng() % msg.size()] ^= static_cast<uint8_t>(1u << (rng() % 8)); break;
      case 1: pk[rng() % pk.size()] ^= static_cast<uint8_t>(1u << (rng() % 8)); break;
      case 2: s[rng() % s.size()] ^= static_cast<uint8_t>(1u << (rng() % 8)); break;
    }
    EXPECT_FALSE(verify_raw(pk, msg, s)) << "iteration " << i;
  }
}

TEST(KeyFiles, HexWithTrailingNewline) {
  auto dir = std::filesystem::temp_directory_path() / ("dtrust-canon-" + std::to_string(getpid()));
  std::filesystem::create_directories(dir);
  SigningKey key = SigningKey::generate();
  write_key_file(dir / "k.sec", key.seed());
  write_key_file(dir / "k.pub", key.public_key().view());
  std::ifstream f(dir / "k.pub");
  std::string contents((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EXPECT_EQ(contents, key.public_key().hex() + "\n");
  EXPECT_EQ(read_signing_key(dir / "k.sec").public_key(), key.public_key());
  EXPECT_EQ(read_public_key(dir / "k.pub"), key.public_key());
  std::filesystem::remove_all(dir);
}

TEST(Hex, RejectsMalformed) {
  EXPECT_THROW(from_hex("abc"), DecodeError);
  EXPECT_THROW(from_hex("zz"), DecodeError);
  EXPECT_EQ(from_hex("00FFaa"), (Bytes{0x00, 0xff, 0xaa}));
}

}  // namespace
}  // namespace dtrust
