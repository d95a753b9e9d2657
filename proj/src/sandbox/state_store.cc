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

#include "dtrust/sandbox/state_store.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dtrust/canon/encoding.h"

namespace dtrust::sandbox {

std::optional<Bytes> MemoryStore::get(ByteView key) const {
  std::lock_guard lock(mu_);
  auto it = map_.find(Bytes(key.begin(), key.end()));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void MemoryStore::put(ByteView key, ByteView value) {
  std::lock_guard lock(mu_);
  map_[Bytes(key.begin(), key.end())] = Bytes(value.begin(), value.end());
}

bool MemoryStore::erase(ByteView key) {
  std::lock_guard lock(mu_);
  return map_.erase(Bytes(key.begin(), key.end())) > 0;
}

std::map<Bytes, Bytes> MemoryStore::snapshot() const {
  std::lock_guard lock(mu_);
  return map_;
}

size_t MemoryStore::size() const {
  std::lock_guard lock(mu_);
  return map_.size();
}

namespace {

constexpr size_t kChecksumBytes = 8;

// Frame: u64 BE payload length || payload || first 8 bytes of sha256(payload).
Bytes frame(const Bytes& payload) {
  Bytes out;
  out.reserve(8 + payload.size() + kChecksumBytes);
  put_u64_be(out, payload.size());
  append(out, payload);
  Digest d = sha256(payload);
  out.insert(out.end(), d.bytes().begin(), d.bytes().begin() + kChecksumBytes);
  return out;
}

Bytes read_all(int fd, const std::string& path) {
  struct stat st;
  if (::fstat(fd, &st) != 0) throw Error("cannot stat " + path);
  Bytes data(static_cast<size_t>(st.st_size));
  size_t got = 0;
  while (got < data.size()) {
    ssize_t n = ::pread(fd, data.data() + got, data.size() - got, static_cast<off_t>(got));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error("cannot read " + path);
    got += static_cast<size_t>(n);
  }
  return data;
}

void write_all(int fd, ByteView data, off_t at) {
  size_t written = 0;
  while (written < data.size()) {
    ssize_t n = ::pwrite(fd, data.data() + written, data.size() - written,
                         at + static_cast<off_t>(written));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(std::string("journal write failed: ") + std::strerror(errno));
    written += static_cast<size_t>(n);
  }
}

uint64_t entry_bytes(const Bytes& k, const Bytes& v) { return 8 + 16 + 1 + k.size() + v.size() + kChecksumBytes; }

}  // namespace

JournalStore::JournalStore(std::filesystem::path path, bool sync)
    : path_(std::move(path)), sync_(sync) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open state journal " + path_.string() + ": " + std::strerror(errno));
  Bytes data = read_all(fd_, path_.string());
  size_t pos = 0;
  while (pos < data.size()) {
    ByteView rest = ByteView(data).subspan(pos);
    if (rest.size() < 8) break;
    uint64_t len = get_u64_be(rest.subspan(0, 8));
    if (len > rest.size() - 8 || rest.size() - 8 - len < kChecksumBytes) break;
    ByteView payload = rest.subspan(8, len);
    Digest d = sha256(payload);
    bool last = 8 + len + kChecksumBytes == rest.size();
    if (std::memcmp(d.bytes().data(), rest.data() + 8 + len, kChecksumBytes) != 0) {
      if (last) break;
      throw StoreCorrupted("state journal checksum mismatch at offset " + std::to_string(pos));
    }
    try {
      uint8_t tag = Decoder::peek_tag(payload);
      if (tag == static_cast<uint8_t>(Tag::kKvPut)) {
        Decoder dec(payload, Tag::kKvPut);
        Bytes k = dec.bytes();
        Bytes v = dec.bytes();
        dec.finish();
        map_[std::move(k)] = std::move(v);
      } else if (tag == static_cast<uint8_t>(Tag::kKvDelete)) {
        Decoder dec(payload, Tag::kKvDelete);
        Bytes k = dec.bytes();
        dec.finish();
        map_.erase(k);
      } else {
        throw DecodeError("unknown record tag");
      }
    } catch (const DecodeError& e) {
      throw StoreCorrupted("bad state journal record at offset " + std::to_string(pos) + ": " +
                           e.what());
    }
    pos += 8 + len + kChecksumBytes;
  }
  if (pos != data.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) {
      throw Error("cannot truncate torn state journal tail");
    }
    truncated_ = true;
  }
  journal_bytes_ = pos;
  for (const auto& [k, v] : map_) live_bytes_ += entry_bytes(k, v);
}

JournalStore::~JournalStore() {
  if (fd_ >= 0) ::close(fd_);
}

void JournalStore::append_record(const Bytes& payload) {
  Bytes f = frame(payload);
  off_t start = static_cast<off_t>(journal_bytes_);
  try {
    write_all(fd_, f, start);
    if (sync_ && ::fdatasync(fd_) != 0) throw Error("state journal sync failed");
  } catch (...) {
    [[maybe_unused]] int rc = ::ftruncate(fd_, start);
    throw;
  }
  journal_bytes_ += f.size();
}

void JournalStore::put(ByteView key, ByteView value) {
  std::lock_guard lock(mu_);
  append_record(Encoder(Tag::kKvPut).bytes(key).bytes(value).finish());
  Bytes k(key.begin(), key.end());
  auto it = map_.find(k);
  if (it != map_.end()) live_bytes_ -= entry_bytes(it->first, it->second);
  Bytes& slot = map_[std::move(k)];
  slot.assign(value.begin(), value.end());
  live_bytes_ += entry_bytes(Bytes(key.begin(), key.end()), slot);
  maybe_compact();
}

bool JournalStore::erase(ByteView key) {
  std::lock_guard lock(mu_);
  Bytes k(key.begin(), key.end());
  auto it = map_.find(k);
  if (it == map_.end()) return false;
  append_record(Encoder(Tag::kKvDelete).bytes(key).finish());
  live_bytes_ -= entry_bytes(it->first, it->second);
  map_.erase(it);
  maybe_compact();
  return true;
}

void JournalStore::maybe_compact() {
  if (journal_bytes_ < (1u << 20) || journal_bytes_ < 4 * live_bytes_) return;
  std::filesystem::path tmp = path_;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) return;
  Bytes all;
  for (const auto& [k, v] : map_) append(all, frame(Encoder(Tag::kKvPut).bytes(k).bytes(v).finish()));
  try {
    write_all(fd, all, 0);
    if (::fsync(fd) != 0) throw Error("sync failed");
  } catch (const Error&) {
    ::close(fd);
    std::filesystem::remove(tmp);
    return;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) {
    ::close(fd);
    std::filesystem::remove(tmp, ec);
    return;
  }
  ::close(fd_);
  fd_ = fd;
  journal_bytes_ = all.size();
}

}  // namespace dtrust::sandbox
