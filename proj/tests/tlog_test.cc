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

#include <filesystem>
#include <fstream>
#include <random>

#include "dtrust/canon/encoding.h"
#include "dtrust/tlog/log.h"
#include "dtrust/tlog/signed_head.h"

namespace dtrust::tlog {
namespace {

// Hand-chains heads with OpenSSL and a byte-by-byte encoder.
Digest oracle_head(uint64_t seq, const Digest& prev, const Digest& code, uint64_t version,
                   const Signature& sig, uint64_t ts) {
  std::vector<uint8_t> buf{0x01};
  auto be = [&](uint64_t v) {
    for (int i = 7; i >= 0; --i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  be(seq);
  buf.insert(buf.end(), prev.view().begin(), prev.view().end());
  buf.insert(buf.end(), code.view().begin(), code.view().end());
  be(version);
  be(64);
  buf.insert(buf.end(), sig.view().begin(), sig.view().end());
  be(ts);
  std::array<uint8_t, 32> out;
  SHA256(buf.data(), buf.size(), out.data());
  return Digest(out);
}

Signature fake_sig(uint8_t fill) {
  Bytes b(64, fill);
  return Signature::from_bytes(b);
}

Digest code(int i) { return sha256(as_bytes("code-" + std::to_string(i))); }

std::unique_ptr<HashChainLog> build(int n) {
  auto log = std::make_unique<HashChainLog>();
  for (int i = 0; i < n; ++i) {
    log->append(code(i), static_cast<uint64_t>(i + 1) * 10, fake_sig(static_cast<uint8_t>(i)),
               1000 + i);
  }
  return log;
}

TEST(Append, GenesisEntry) {
  HashChainLog log;
  EXPECT_TRUE(log.head().empty());
  LogHead h = log.append(code(0), 1, fake_sig(1), 5);
  EXPECT_EQ(h.seq, 0u);
  auto e = log.latest();
  ASSERT_TRUE(e);
  EXPECT_EQ(e->seq, 0u);
  EXPECT_TRUE(e->prev_head.is_zero());
}

TEST(Append, RejectsNonIncreasingVersion) {
  HashChainLog log;
  log.append(code(0), 5, fake_sig(1), 0);
  EXPECT_THROW(log.append(code(1), 5, fake_sig(2), 0), RollbackRejected);
  EXPECT_THROW(log.append(code(1), 4, fake_sig(2), 0), RollbackRejected);
  EXPECT_EQ(log.size(), 1u);
}

TEST(Append, HeadsMatchIndependentChain) {
  auto log_ptr = build(3);
  HashChainLog& log = *log_ptr;
  Digest prev = Digest::zero();
  for (int i = 0; i < 3; ++i) {
    prev = oracle_head(i, prev, code(i), (i + 1) * 10, fake_sig(static_cast<uint8_t>(i)), 1000 + i);
    EXPECT_EQ(log.head_at(i)->head, prev) << "seq " << i;
  }
  EXPECT_EQ(log.head().head, prev);
  EXPECT_EQ(log.head().seq, 2u);
}

TEST(Append, StorageFailureLeavesLogUnchanged) {
  auto storage = std::make_unique<MemoryLogStorage>();
  MemoryLogStorage* raw = storage.get();
  HashChainLog log(std::move(storage));
  log.append(code(0), 1, fake_sig(0), 0);
  LogHead before = log.head();
  raw->fail_next_append();
  EXPECT_THROW(log.append(code(1), 2, fake_sig(1), 0), AppendFailed);
  EXPECT_EQ(log.head(), before);
  EXPECT_EQ(log.size(), 1u);
  log.append(code(1), 2, fake_sig(1), 0);
  EXPECT_EQ(log.size(), 2u);
}

TEST(VerifyChain, EmptyLogConvention) {
  EXPECT_TRUE(verify_chain({}, LogHead::empty_log()));
  LogHead nonzero{kEmptySeq, code(0)};
  EXPECT_FALSE(verify_chain({}, nonzero));
}

TEST(VerifyChain, ValidAndTampered) {
  auto log_ptr = build(3);
  HashChainLog& log = *log_ptr;
  auto entries = log.entries();
  EXPECT_TRUE(verify_chain(entries, log.head()));
  entries[1].code_digest = code(99);
  ChainCheck check = verify_chain(entries, log.head());
  EXPECT_FALSE(check);
  EXPECT_FALSE(check.diagnostic.empty());
}

TEST(VerifyChain, DiagnosticNamesFirstViolation) {
  auto log_ptr = build(3);
  HashChainLog& log = *log_ptr;
  auto entries = log.entries();
  entries[2].version = entries[1].version;
  ChainCheck check = verify_chain(entries, log.head());
  EXPECT_NE(check.diagnostic.find("entry 2: version"), std::string::npos) << check.diagnostic;
}

// Every single-field mutation of every entry in chains of length 1..8.
TEST(VerifyChainProperty, ExhaustiveSingleFieldMutation) {
  int mutations = 0;
  for (int n = 1; n <= 8; ++n) {
    auto log_ptr = build(n);
  HashChainLog& log = *log_ptr;
    const auto original = log.entries();
    const LogHead claimed = log.head();
    ASSERT_TRUE(verify_chain(original, claimed));
    for (int i = 0; i < n; ++i) {
      for (int field = 0; field < 6; ++field) {
        for (int variant = 0; variant < 2; ++variant) {
          auto entries = original;
          LogEntry& e = entries[i];
          switch (field) {
            case 0: e.seq = variant ? e.seq + 1 : e.seq ^ 0x8000000000000000ull; break;
            case 1: {
              auto b = e.prev_head.bytes();
              b[variant ? 0 : 31] ^= 1;
              e.prev_head = Digest(b);
              break;
            }
            case 2: {
              auto b = e.code_digest.bytes();
              b[variant ? 5 : 31] ^= 0x80;
              e.code_digest = Digest(b);
              break;
            }
            case 3: e.version = variant ? e.version + 1 : e.version - 1; break;
            case 4: e.update_sig.mutable_bytes()[variant ? 0 : 63] ^= 1; break;
            case 5: e.timestamp = variant ? e.timestamp + 1 : 0; break;
          }
          ++mutations;
          EXPECT_FALSE(verify_chain(entries, claimed))
              << "missed mutation n=" << n << " entry=" << i << " field=" << field;
        }
      }
    }
  }
  EXPECT_EQ(mutations, 12 * (1 + 2 + 3 + 4 + 5 + 6 + 7 + 8));
}

TEST(VerifyChain, DeletionAndReorderDetected) {
  auto log_ptr = build(4);
  HashChainLog& log = *log_ptr;
  auto entries = log.entries();
  auto dropped = entries;
  dropped.erase(dropped.begin() + 1);
  EXPECT_FALSE(verify_chain(dropped, log.head()));
  auto swapped = entries;
  std::swap(swapped[1], swapped[2]);
  EXPECT_FALSE(verify_chain(swapped, log.head()));
  auto truncated = entries;
  truncated.pop_back();
  EXPECT_FALSE(verify_chain(truncated, log.head()));
}

TEST(IsPrefix, Reflexive) {
  auto log_ptr = build(2);
  HashChainLog& log = *log_ptr;
  EXPECT_TRUE(is_prefix(log.head(), {}, log.head()));
  EXPECT_TRUE(is_prefix(LogHead::empty_log(), {}, LogHead::empty_log()));
}

TEST(IsPrefix, GenuineDeltaAndSubstitution) {
  auto log_ptr = build(4);
  HashChainLog& log = *log_ptr;
  LogHead old = *log.head_at(1);
  auto delta = *log.entries_since(1);
  ASSERT_EQ(delta.size(), 2u);
  EXPECT_TRUE(is_prefix(old, delta, log.head()));

  HashChainLog other;
  auto entries = log.entries();
  for (int i = 0; i < 3; ++i) {
    other.append(entries[i].code_digest, entries[i].version, entries[i].update_sig,
                 entries[i].timestamp);
  }
  other.append(code(42), 99, fake_sig(9), 0);
  auto forged = delta;
  forged[1] = *other.latest();
  EXPECT_FALSE(is_prefix(old, forged, log.head()));
  // A delta with a gap.
  std::vector<LogEntry> gap{delta[1]};
  EXPECT_FALSE(is_prefix(old, gap, log.head()));
}

TEST(IsPrefix, FromEmptyLog) {
  auto log_ptr = build(3);
  HashChainLog& log = *log_ptr;
  EXPECT_TRUE(is_prefix(LogHead::empty_log(), log.entries(), log.head()));
}

TEST(IsPrefixProperty, TransitivityAndNoSilentDeletion) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng() % 12);
    auto log_ptr = build(n);
  HashChainLog& log = *log_ptr;
    auto all = log.entries();
    // Pick a <= b <= c among {empty, 0..n-1}.
    std::vector<uint64_t> pts{kEmptySeq};
    for (int i = 0; i < n; ++i) pts.push_back(i);
    std::vector<size_t> idx{rng() % pts.size(), rng() % pts.size(), rng() % pts.size()};
    std::sort(idx.begin(), idx.end());
    auto head_at = [&](size_t k) { return *log.head_at(pts[k]); };
    auto delta = [&](size_t from, size_t to) {
      return std::vector<LogEntry>(all.begin() + static_cast<long>(from),
                                   all.begin() + static_cast<long>(to));
    };
    LogHead a = head_at(idx[0]), b = head_at(idx[1]), c = head_at(idx[2]);
    auto ab = delta(idx[0], idx[1]);
    auto bc = delta(idx[1], idx[2]);
    auto ac = delta(idx[0], idx[2]);
    ASSERT_TRUE(is_prefix(a, ab, b));
    ASSERT_TRUE(is_prefix(b, bc, c));
    EXPECT_TRUE(is_prefix(a, ac, c));
    if (idx[0] < idx[2]) {
      // The longer log never passes as a prefix of the shorter one, whatever
      // delta is offered.
      EXPECT_FALSE(is_prefix(c, {}, a));
      EXPECT_FALSE(is_prefix(c, ac, a));
      EXPECT_FALSE(is_prefix(c, all, a));
    }
  }
}

TEST(EntriesSince, BoundsAndGenesis) {
  auto log_ptr = build(3);
  HashChainLog& log = *log_ptr;
  EXPECT_EQ(log.entries_since(kEmptySeq)->size(), 3u);
  EXPECT_EQ(log.entries_since(2)->size(), 0u);
  EXPECT_EQ(log.entries_since(0)->size(), 2u);
  EXPECT_FALSE(log.entries_since(3));
}

class FileLogTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("dtrust-tlog-" + std::to_string(getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path() const { return (dir_ / "log.bin").string(); }
  std::filesystem::path dir_;
};

TEST_F(FileLogTest, PersistsAndReloads) {
  LogHead head;
  {
    HashChainLog log(std::make_unique<FileLogStorage>(path()));
    for (int i = 0; i < 3; ++i) head = log.append(code(i), i + 1, fake_sig(1), 0);
  }
  HashChainLog reloaded(std::make_unique<FileLogStorage>(path()));
  EXPECT_EQ(reloaded.head(), head);
  EXPECT_THROW(reloaded.append(code(7), 3, fake_sig(1), 0), RollbackRejected);
}

TEST_F(FileLogTest, FileFormatIsLengthPrefixedEntries) {
  {
    HashChainLog log(std::make_unique<FileLogStorage>(path()));
    log.append(code(0), 1, fake_sig(1), 0);
  }
  std::ifstream f(path(), std::ios::binary);
  Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  ASSERT_GE(data.size(), 8u);
  uint64_t len = get_u64_be(data);
  EXPECT_EQ(len + 8, data.size());
  LogEntry e = LogEntry::decode(ByteView(data).subspan(8));
  EXPECT_EQ(e.code_digest, code(0));
}

TEST_F(FileLogTest, TornTailTruncatedOnLoad) {
  LogHead head;
  {
    HashChainLog log(std::make_unique<FileLogStorage>(path()));
    head = log.append(code(0), 1, fake_sig(1), 0);
  }
  {
    std::ofstream f(path(), std::ios::binary | std::ios::app);
    f.write("\x00\x00\x00\x00\x00\x00\x01\x00partial", 15);
  }
  auto storage = std::make_unique<FileLogStorage>(path());
  FileLogStorage* raw = storage.get();
  HashChainLog log(std::move(storage));
  EXPECT_TRUE(raw->truncated_torn_tail());
  EXPECT_EQ(log.head(), head);
}

TEST_F(FileLogTest, CorruptRecordFailsVerification) {
  {
    HashChainLog log(std::make_unique<FileLogStorage>(path()));
    log.append(code(0), 1, fake_sig(1), 0);
    log.append(code(1), 2, fake_sig(1), 0);
  }
  {
    std::fstream f(path(), std::ios::binary | std::ios::in | std::ios::out);
    // Flip a byte inside the second entry's prev_head field.
    uint64_t first_len = 8 + 1 + 8 + 32 + 32 + 8 + 8 + 64 + 8;
    f.seekp(static_cast<std::streamoff>(first_len + 8 + 1 + 8 + 3));
    f.put('\x55');
  }
  EXPECT_THROW(HashChainLog(std::make_unique<FileLogStorage>(path())), LogCorrupted);
}

TEST(SignedHead, SignVerifyAndEncode) {
  SigningKey key = SigningKey::generate();
  auto log_ptr = build(2);
  HashChainLog& log = *log_ptr;
  SignedHead sh = sign_head(key, as_bytes("td1"), log.head());
  EXPECT_TRUE(verify_signed_head(sh, key.public_key()));
  EXPECT_EQ(SignedHead::decode(sh.encode()), sh);
  SignedHead other_domain = sh;
  other_domain.domain_id = to_bytes("td2");
  EXPECT_FALSE(verify_signed_head(other_domain, key.public_key()));
  SignedHead unsigned_head{to_bytes("td0"), log.head(), std::nullopt};
  EXPECT_FALSE(verify_signed_head(unsigned_head, key.public_key()));
  EXPECT_EQ(SignedHead::decode(unsigned_head.encode()), unsigned_head);
}

struct ForkFixture {
  SigningKey key = SigningKey::generate();
  SignedHead a, b;
  ForkFixture() {
    auto x_ptr = build(5);
  HashChainLog& x = *x_ptr;
    auto y_ptr = build(4);
  HashChainLog& y = *y_ptr;
    y.append(code(77), 100, fake_sig(7), 0);
    a = sign_head(key, as_bytes("td1"), x.head());
    b = sign_head(key, as_bytes("td1"), y.head());
  }
};

TEST(Equivocation, ConflictingHeadsAtSameSeq) {
  ForkFixture f;
  ASSERT_EQ(f.a.head.seq, 4u);
  EquivocationProof p = make_equivocation_proof(f.a, f.b, f.key.public_key());
  EXPECT_TRUE(verify_equivocation(p, f.key.public_key()));
  EquivocationProof decoded = EquivocationProof::decode(p.encode());
  EXPECT_TRUE(verify_equivocation(decoded, f.key.public_key()));
  // Argument order does not change proof bytes.
  EXPECT_EQ(make_equivocation_proof(f.b, f.a, f.key.public_key()).encode(), p.encode());
  EXPECT_FALSE(verify_equivocation(p, SigningKey::generate().public_key()));
}

TEST(Equivocation, PreconditionViolations) {
  ForkFixture f;
  auto reason = [&](const SignedHead& a, const SignedHead& b) {
    try {
      make_equivocation_proof(a, b, f.key.public_key());
    } catch (const NotEquivocation& e) {
      return e.reason();
    }
    ADD_FAILURE() << "expected NotEquivocation";
    return NotEquivocationReason::kBadSignature;
  };
  EXPECT_EQ(reason(f.a, f.a), NotEquivocationReason::kEqualHeads);
  SignedHead bad = f.b;
  bad.signature->mutable_bytes()[3] ^= 1;
  EXPECT_EQ(reason(f.a, bad), NotEquivocationReason::kBadSignature);
  SignedHead other = sign_head(f.key, as_bytes("td2"), f.b.head);
  EXPECT_EQ(reason(f.a, other), NotEquivocationReason::kDifferentDomains);
  auto shorter_ptr = build(2);
  HashChainLog& shorter = *shorter_ptr;
  SignedHead early = sign_head(f.key, as_bytes("td1"), shorter.head());
  EXPECT_EQ(reason(f.a, early), NotEquivocationReason::kDifferentSeq);
}

TEST(EquivocationProperty, CompleteForAnyConflictingPair) {
  SigningKey key = SigningKey::generate();
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 1 + static_cast<int>(rng() % 8);
    HashChainLog x, y;
    int fork_at = static_cast<int>(rng() % n);
    for (int i = 0; i < n; ++i) {
      x.append(code(i), i + 1, fake_sig(0), 0);
      y.append(i < fork_at ? code(i) : code(1000 + i), i + 1, fake_sig(0), 0);
    }
    SignedHead a = sign_head(key, as_bytes("d"), x.head());
    SignedHead b = sign_head(key, as_bytes("d"), y.head());
    EXPECT_TRUE(verify_equivocation(make_equivocation_proof(a, b, key.public_key()),
                                    key.public_key()));
  }
}

}  // namespace
}  // namespace dtrust::tlog
