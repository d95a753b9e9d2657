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

#include <algorithm>
#include <array>
#include <random>

#include "dtrust/demoapp/shamir.h"

namespace dtrust::demoapp {
namespace {

// Independent field arithmetic: shift-and-add multiplication with explicit
// reduction, no tables.
uint8_t slow_mul(uint8_t a, uint8_t b) {
  uint16_t p = 0;
  for (int i = 7; i >= 0; --i) {
    p <<= 1;
    if (p & 0x100) p ^= 0x11b;
    if (b & (1 << i)) p ^= a;
  }
  return static_cast<uint8_t>(p);
}

uint8_t slow_eval(const std::vector<uint8_t>& coeffs_low_first, uint8_t x) {
  uint8_t y = 0, xp = 1;
  for (uint8_t c : coeffs_low_first) {
    y ^= slow_mul(c, xp);
    xp = slow_mul(xp, x);
  }
  return y;
}

// Serves a fixed byte string, then fails the test if asked for more.
class ScriptedRandom : public RandomSource {
 public:
  explicit ScriptedRandom(Bytes bytes) : bytes_(std::move(bytes)) {}
  void fill(std::span<uint8_t> out) override {
    ASSERT_LE(pos_ + out.size(), bytes_.size());
    std::copy_n(bytes_.begin() + pos_, out.size(), out.begin());
    pos_ += out.size();
  }

 private:
  Bytes bytes_;
  size_t pos_ = 0;
};

class MtRandom : public RandomSource {
 public:
  explicit MtRandom(uint32_t seed) : rng_(seed) {}
  void fill(std::span<uint8_t> out) override {
    for (auto& b : out) b = static_cast<uint8_t>(rng_());
  }

 private:
  std::mt19937 rng_;
};

void for_each_subset(size_t n, size_t k, const std::function<void(const std::vector<size_t>&)>& f) {
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    std::vector<size_t> idx;
    for (size_t i = 0; i < n; ++i) {
      if (pick[i]) idx.push_back(i);
    }
    f(idx);
  } while (std::prev_permutation(pick.begin(), pick.end()));
}

TEST(Gf256, TableMultiplicationMatchesBitwiseOracleExhaustively) {
  for (int a = 0; a < 256; ++a) {
    for (int b = 0; b < 256; ++b) {
      ASSERT_EQ(gf256::mul(a, b), slow_mul(a, b)) << a << "*" << b;
    }
  }
}

TEST(Gf256, KnownProductsAndInverses) {
  EXPECT_EQ(gf256::mul(0x57, 0x83), 0xc1);  // FIPS-197 worked example
  EXPECT_EQ(gf256::mul(0x57, 0x13), 0xfe);
  for (int a = 1; a < 256; ++a) EXPECT_EQ(gf256::mul(a, gf256::inv(a)), 1) << a;
  EXPECT_THROW(gf256::inv(0), Error);
}

TEST(Split, ThresholdOneGivesSecretInEveryShare) {
  ScriptedRandom none({});
  Bytes secret = to_bytes("hello");
  auto shares = split(secret, 1, 3, none);
  ASSERT_EQ(shares.size(), 3u);
  for (size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(shares[j].x, j + 1);
    EXPECT_EQ(shares[j].y, secret);
    EXPECT_EQ(recover(std::span(&shares[j], 1)), secret);
  }
}

TEST(Split, TwoOfTwoSingleByteMatchesHandComputation) {
  const uint8_t s = 0x42, a = 0x9d;
  ScriptedRandom rng({a});
  auto shares = split(Bytes{s}, 2, 2, rng);
  EXPECT_EQ(shares[0].y, Bytes{static_cast<uint8_t>(s ^ slow_mul(a, 1))});
  EXPECT_EQ(shares[1].y, Bytes{static_cast<uint8_t>(s ^ slow_mul(a, 2))});
  EXPECT_EQ(recover(shares), Bytes{s});
}

TEST(Split, ThreeOfFiveMatchesPolynomialOracleAndEverySubsetRecovers) {
  MtRandom source(5);
  Bytes secret(32), coeffs(64);
  source.fill(secret);
  source.fill(coeffs);
  ScriptedRandom rng(coeffs);
  auto shares = split(secret, 3, 5, rng);
  for (const Share& sh : shares) {
    for (size_t i = 0; i < secret.size(); ++i) {
      uint8_t expect = slow_eval({secret[i], coeffs[2 * i], coeffs[2 * i + 1]}, sh.x);
      ASSERT_EQ(sh.y[i], expect);
    }
  }
  int subsets = 0;
  for_each_subset(5, 3, [&](const std::vector<size_t>& idx) {
    std::vector<Share> pick;
    for (size_t i : idx) pick.push_back(shares[i]);
    EXPECT_EQ(recover(pick), secret);
    ++subsets;
  });
  EXPECT_EQ(subsets, 10);
}

TEST(Split, RejectsBadParameters) {
  MtRandom rng(1);
  EXPECT_THROW(split(Bytes{}, 1, 1, rng), BadParams);
  EXPECT_THROW(split(Bytes{1}, 0, 3, rng), BadParams);
  EXPECT_THROW(split(Bytes{1}, 4, 3, rng), BadParams);
  EXPECT_THROW(split(Bytes{1}, 2, 256, rng), BadParams);
  EXPECT_NO_THROW(split(Bytes{1}, 255, 255, rng));
}

TEST(Recover, RejectsBadShareSets) {
  MtRandom rng(2);
  Bytes secret = to_bytes("secret");
  auto shares = split(secret, 3, 5, rng);
  EXPECT_THROW(recover(std::span(shares).first(2)), InsufficientShares);
  EXPECT_THROW(recover(std::span<const Share>{}), InsufficientShares);
  std::vector<Share> dup = {shares[0], shares[1], shares[0]};
  EXPECT_THROW(recover(dup), BadShares);
  std::vector<Share> mixed = {shares[0], shares[1], shares[2]};
  mixed[2].y.pop_back();
  EXPECT_THROW(recover(mixed), BadShares);
  mixed = {shares[0], shares[1], shares[2]};
  mixed[1].t = 2;
  EXPECT_THROW(recover(mixed), BadShares);
  mixed = {shares[0], shares[1], shares[2]};
  mixed[1].x = 9;
  EXPECT_THROW(recover(mixed), BadShares);
}

TEST(Recover, FlippedByteChangesResult) {
  MtRandom rng(3);
  Bytes secret(32);
  rng.fill(secret);
  auto shares = split(secret, 3, 5, rng);
  for (size_t j = 0; j < 3; ++j) {
    for (size_t i = 0; i < secret.size(); ++i) {
      for (uint8_t bit : {0x01, 0x80}) {
        std::vector<Share> pick(shares.begin(), shares.begin() + 3);
        pick[j].y[i] ^= bit;
        EXPECT_NE(recover(pick), secret);
      }
    }
  }
}

// recover(split(s)) == s over every t-subset, for randomized (t, n, secret).
TEST(Property, RecoverInvertsSplitOverAllSubsets) {
  std::mt19937 gen(2024);
  MtRandom rng(99);
  int cases = 0;
  for (int trial = 0; trial < 120; ++trial) {
    unsigned n = 1 + gen() % 10;
    unsigned t = 1 + gen() % n;
    Bytes secret(1 + gen() % 48);
    rng.fill(secret);
    auto shares = split(secret, t, n, rng);
    for_each_subset(n, t, [&](const std::vector<size_t>& idx) {
      std::vector<Share> pick;
      for (size_t i : idx) pick.push_back(shares[i]);
      std::shuffle(pick.begin(), pick.end(), gen);
      ASSERT_EQ(recover(pick), secret);
      ++cases;
    });
  }
  EXPECT_GE(cases, 1000);
}

// For t = 2 a single share y = s + a*x is uniform over the coefficient a
// for every secret byte s: enumerate all 256 x 256 (s, a) pairs and require
// each y exactly once per s, at every share index.
TEST(Property, SingleShareIsExactlyUniform) {
  for (uint8_t x = 1; x <= 3; ++x) {
    for (int s = 0; s < 256; ++s) {
      std::array<int, 256> count{};
      for (int a = 0; a < 256; ++a) {
        ScriptedRandom rng({static_cast<uint8_t>(a)});
        auto shares = split(Bytes{static_cast<uint8_t>(s)}, 2, 3, rng);
        ++count[shares[x - 1].y[0]];
      }
      for (int y = 0; y < 256; ++y) ASSERT_EQ(count[y], 1) << "x=" << int(x) << " s=" << s;
    }
  }
}

TEST(ShareEncoding, RoundTripsAndRejectsGarbage) {
  MtRandom rng(4);
  auto shares = split(to_bytes("abc"), 2, 3, rng);
  for (const Share& s : shares) EXPECT_EQ(Share::decode(s.encode()), s);
  Bytes enc = shares[0].encode();
  EXPECT_EQ(enc[0], 0x08);
  EXPECT_EQ(enc.size(), 1u + 8 * 3 + 8 + 3);
  enc.push_back(0);
  EXPECT_THROW(Share::decode(enc), DecodeError);
  Share bad = shares[0];
  bad.x = 7;
  EXPECT_THROW(Share::decode(bad.encode()), DecodeError);
}

}  // namespace
}  // namespace dtrust::demoapp
