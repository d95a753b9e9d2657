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

#include "dtrust/tlog/log.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "dtrust/canon/encoding.h"

namespace dtrust::tlog {

Bytes LogEntry::encode() const {
  return Encoder(Tag::kLogEntry)
      .u64(seq)
      .digest(prev_head)
      .digest(code_digest)
      .u64(version)
      .bytes(update_sig.view())
      .u64(timestamp)
      .finish();
}

LogEntry LogEntry::decode(ByteView in) {
  Decoder dec(in, Tag::kLogEntry);
  LogEntry e;
  e.seq = dec.u64();
  e.prev_head = dec.digest();
  e.code_digest = dec.digest();
  e.version = dec.u64();
  e.update_sig = Signature::from_bytes(dec.bytes());
  e.timestamp = dec.u64();
  dec.finish();
  return e;
}

Digest LogEntry::head() const { return sha256(encode()); }

std::string to_string(const LogHead& h) {
  if (h.empty()) return "(empty log)";
  return "seq=" + std::to_string(h.seq) + " head=" + h.head.hex();
}

namespace {

std::string at(uint64_t seq) { return "entry " + std::to_string(seq) + ": "; }

}  // namespace

ChainCheck verify_chain(std::span<const LogEntry> entries, const LogHead& claimed) {
  if (entries.empty()) {
    if (claimed.empty() && claimed.head.is_zero()) return ChainCheck::pass();
    return ChainCheck::fail("empty chain but claimed head is not the genesis sentinel");
  }
  Digest prev = Digest::zero();
  for (size_t i = 0; i < entries.size(); ++i) {
    const LogEntry& e = entries[i];
    if (e.seq != i) {
      return ChainCheck::fail(at(i) + "seq is " + std::to_string(e.seq) + ", expected " +
                              std::to_string(i));
    }
    if (i == 0 && !e.prev_head.is_zero()) {
      return ChainCheck::fail(at(0) + "prev_head is not the all-zero genesis sentinel");
    }
    if (e.prev_head != prev) return ChainCheck::fail(at(i) + "prev_head does not link to entry " +
                                                     std::to_string(i - 1));
    if (i > 0 && e.version <= entries[i - 1].version) {
      return ChainCheck::fail(at(i) + "version " + std::to_string(e.version) +
                              " does not exceed previous version " +
                              std::to_string(entries[i - 1].version));
    }
    prev = e.head();
  }
  if (claimed.seq != entries.back().seq) {
    return ChainCheck::fail("claimed head seq " + std::to_string(claimed.seq) +
                            " differs from last entry seq " + std::to_string(entries.back().seq));
  }
  if (claimed.head != prev) return ChainCheck::fail("recomputed head differs from claimed head");
  return ChainCheck::pass();
}

ChainCheck is_prefix(const LogHead& old, std::span<const LogEntry> delta, const LogHead& updated) {
  if (delta.empty()) {
    if (old == updated) return ChainCheck::pass();
    return ChainCheck::fail("no entries supplied but heads differ");
  }
  uint64_t expected = old.seq + 1;  // wraps to 0 from the empty log
  Digest prev = old.head;
  for (size_t i = 0; i < delta.size(); ++i) {
    const LogEntry& e = delta[i];
    if (e.seq != expected) {
      return ChainCheck::fail("gap: got seq " + std::to_string(e.seq) + ", expected " +
                              std::to_string(expected));
    }
    if (e.prev_head != prev) {
      return ChainCheck::fail(at(e.seq) + "prev_head does not extend the known head");
    }
    if (i > 0 && e.version <= delta[i - 1].version) {
      return ChainCheck::fail(at(e.seq) + "version does not increase");
    }
    prev = e.head();
    ++expected;
  }
  if (delta.back().seq != updated.seq) {
    return ChainCheck::fail("delta ends at seq " + std::to_string(delta.back().seq) +
                            " but new head is at seq " + std::to_string(updated.seq));
  }
  if (prev != updated.head) return ChainCheck::fail("replayed head differs from new head");
  return ChainCheck::pass();
}

void MemoryLogStorage::append(ByteView record) {
  if (fail_next_) {
    fail_next_ = false;
    throw AppendFailed("injected storage failure");
  }
  records_.emplace_back(record.begin(), record.end());
}

FileLogStorage::FileLogStorage(std::string path, bool sync) : path_(std::move(path)), sync_(sync) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open log file " + path_ + ": " + std::strerror(errno));
}

FileLogStorage::~FileLogStorage() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<Bytes> FileLogStorage::load() {
  struct stat st;
  if (::fstat(fd_, &st) != 0) throw Error("cannot stat log file " + path_);
  Bytes data(static_cast<size_t>(st.st_size));
  size_t got = 0;
  while (got < data.size()) {
    ssize_t n = ::pread(fd_, data.data() + got, data.size() - got, static_cast<off_t>(got));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error("cannot read log file " + path_);
    got += static_cast<size_t>(n);
  }

  std::vector<Bytes> records;
  size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 8) break;
    uint64_t len = get_u64_be(ByteView(data).subspan(pos, 8));
    if (len > data.size() - pos - 8) break;
    records.emplace_back(data.begin() + pos + 8, data.begin() + pos + 8 + len);
    pos += 8 + len;
  }
  if (pos != data.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) {
      throw Error("cannot truncate torn log tail in " + path_);
    }
    truncated_ = true;
  }
  return records;
}

void FileLogStorage::append(ByteView record) {
  struct stat st;
  if (::fstat(fd_, &st) != 0) throw AppendFailed("cannot stat log file");
  off_t start = st.st_size;

  Bytes frame;
  frame.reserve(8 + record.size());
  put_u64_be(frame, record.size());
  dtrust::append(frame, record);

  size_t written = 0;
  while (written < frame.size()) {
    ssize_t n = ::pwrite(fd_, frame.data() + written, frame.size() - written,
                         start + static_cast<off_t>(written));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      int err = errno;
      [[maybe_unused]] int rc = ::ftruncate(fd_, start);
      throw AppendFailed(std::string("log write failed: ") + std::strerror(err));
    }
    written += static_cast<size_t>(n);
  }
  if (sync_ && ::fdatasync(fd_) != 0) {
    int err = errno;
    [[maybe_unused]] int rc = ::ftruncate(fd_, start);
    throw AppendFailed(std::string("log sync failed: ") + std::strerror(err));
  }
}

HashChainLog::HashChainLog(std::unique_ptr<LogStorage> storage) : storage_(std::move(storage)) {
  if (!storage_) storage_ = std::make_unique<MemoryLogStorage>();
  for (const Bytes& record : storage_->load()) {
    try {
      entries_.push_back(LogEntry::decode(record));
    } catch (const DecodeError& e) {
      throw LogCorrupted("undecodable log record " + std::to_string(entries_.size()) + ": " +
                         e.what());
    }
    heads_.push_back(entries_.back().head());
  }
  LogHead claimed = entries_.empty() ? LogHead::empty_log() : LogHead{entries_.back().seq,
                                                                        heads_.back()};
  if (ChainCheck check = verify_chain(entries_, claimed); !check) {
    throw LogCorrupted("log failed verification: " + check.diagnostic);
  }
}

LogHead HashChainLog::append(const Digest& code_digest, uint64_t version,
                             const Signature& update_sig, uint64_t timestamp) {
  std::unique_lock lock(mu_);
  if (!entries_.empty() && version <= entries_.back().version) {
    throw RollbackRejected("version " + std::to_string(version) +
                           " does not exceed current version " +
                           std::to_string(entries_.back().version));
  }
  LogEntry e;
  e.seq = entries_.size();
  e.prev_head = heads_.empty() ? Digest::zero() : heads_.back();
  e.code_digest = code_digest;
  e.version = version;
  e.update_sig = update_sig;
  e.timestamp = timestamp;

  Bytes record = e.encode();
  try {
    storage_->append(record);
  } catch (const AppendFailed&) {
    throw;
  } catch (const std::exception& ex) {
    throw AppendFailed(ex.what());
  }
  Digest head = sha256(record);
  entries_.push_back(e);
  heads_.push_back(head);
  return {e.seq, head};
}

LogHead HashChainLog::head() const {
  std::shared_lock lock(mu_);
  if (entries_.empty()) return LogHead::empty_log();
  return {entries_.back().seq, heads_.back()};
}

std::optional<LogEntry> HashChainLog::latest() const {
  std::shared_lock lock(mu_);
  if (entries_.empty()) return std::nullopt;
  return entries_.back();
}

std::vector<LogEntry> HashChainLog::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

std::optional<std::vector<LogEntry>> HashChainLog::entries_since(uint64_t known_seq) const {
  std::shared_lock lock(mu_);
  uint64_t first = known_seq + 1;  // kEmptySeq wraps to 0
  if (first > entries_.size()) return std::nullopt;
  return std::vector<LogEntry>(entries_.begin() + static_cast<ptrdiff_t>(first), entries_.end());
}

std::optional<LogHead> HashChainLog::head_at(uint64_t seq) const {
  std::shared_lock lock(mu_);
  if (seq == kEmptySeq) return LogHead::empty_log();
  if (seq >= entries_.size()) return std::nullopt;
  return LogHead{seq, heads_[seq]};
}

uint64_t HashChainLog::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

}  // namespace dtrust::tlog
