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

// Per-domain append-only log of installed code digests, kept as a hash chain.
//
// Entry k commits to entry k-1 through prev_head, so the head of the last
// entry commits to the whole history. The empty log has head = 32 zero bytes
// and seq = kEmptySeq.

#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "dtrust/canon/crypto.h"

namespace dtrust::tlog {

inline constexpr uint64_t kEmptySeq = ~uint64_t{0};

struct LogEntry {
  uint64_t seq = 0;
  Digest prev_head;
  Digest code_digest;
  uint64_t version = 0;
  Signature update_sig;
  uint64_t timestamp = 0;  // informational only

  Bytes encode() const;
  static LogEntry decode(ByteView in);
  Digest head() const;

  bool operator==(const LogEntry&) const = default;
};

struct LogHead {
  uint64_t seq = kEmptySeq;
  Digest head;

  static LogHead empty_log() { return {}; }
  static LogHead of(const LogEntry& e) { return {e.seq, e.head()}; }

  bool empty() const { return seq == kEmptySeq; }
  // Number of entries committed to; wraps to 0 for the empty log.
  uint64_t size() const { return seq + 1; }

  bool operator==(const LogHead&) const = default;
};

std::string to_string(const LogHead& h);

// Result of a structural check. `diagnostic` names the first violated rule.
struct ChainCheck {
  bool ok = true;
  std::string diagnostic;

  static ChainCheck pass() { return {}; }
  static ChainCheck fail(std::string why) { return {false, std::move(why)}; }
  explicit operator bool() const { return ok; }
};

// True iff seq numbering, the genesis sentinel, prev_head linkage and version
// monotonicity all hold and the recomputed final head equals `claimed`.
ChainCheck verify_chain(std::span<const LogEntry> entries, const LogHead& claimed);

// True iff replaying `delta` (the entries old.seq+1 .. new.seq) from `old`
// yields `updated`.
ChainCheck is_prefix(const LogHead& old, std::span<const LogEntry> delta, const LogHead& updated);

class RollbackRejected : public Error {
 public:
  using Error::Error;
};

class AppendFailed : public Error {
 public:
  using Error::Error;
};

class LogCorrupted : public Error {
 public:
  using Error::Error;
};

// Durable record sink behind a HashChainLog.
class LogStorage {
 public:
  virtual ~LogStorage() = default;
  virtual std::vector<Bytes> load() = 0;
  // Must either persist the record completely or throw leaving storage as it was.
  virtual void append(ByteView record) = 0;
};

class MemoryLogStorage : public LogStorage {
 public:
  std::vector<Bytes> load() override { return records_; }
  void append(ByteView record) override;

  // Test hook: the next append throws AppendFailed.
  void fail_next_append() { fail_next_ = true; }

 private:
  std::vector<Bytes> records_;
  bool fail_next_ = false;
};

// One append-only file: each record is an 8-byte big-endian length followed
// by the canonical entry encoding. A torn trailing record (crash mid-write)
// is truncated on load; anything else malformed throws LogCorrupted.
class FileLogStorage : public LogStorage {
 public:
  explicit FileLogStorage(std::string path, bool sync = true);
  ~FileLogStorage() override;
  FileLogStorage(const FileLogStorage&) = delete;
  FileLogStorage& operator=(const FileLogStorage&) = delete;

  std::vector<Bytes> load() override;
  void append(ByteView record) override;

  bool truncated_torn_tail() const { return truncated_; }

 private:
  std::string path_;
  int fd_ = -1;
  bool sync_;
  bool truncated_ = false;
};

// Thread-safe: appends are serialized, reads observe a consistent prefix.
class HashChainLog {
 public:
  // Loads and re-verifies any existing records. Throws LogCorrupted.
  explicit HashChainLog(std::unique_ptr<LogStorage> storage = nullptr);

  // Throws RollbackRejected if version does not exceed the last entry's
  // version, AppendFailed if storage rejects the record (log unchanged).
  LogHead append(const Digest& code_digest, uint64_t version, const Signature& update_sig,
                 uint64_t timestamp);

  LogHead head() const;
  std::optional<LogEntry> latest() const;
  std::vector<LogEntry> entries() const;
  // Entries with seq in (known_seq, head.seq]. kEmptySeq means "from genesis".
  // Returns nullopt when known_seq lies beyond the end of the log.
  std::optional<std::vector<LogEntry>> entries_since(uint64_t known_seq) const;
  std::optional<LogHead> head_at(uint64_t seq) const;
  uint64_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::unique_ptr<LogStorage> storage_;
  std::vector<LogEntry> entries_;
  std::vector<Digest> heads_;
};

}  // namespace dtrust::tlog
