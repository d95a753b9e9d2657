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

#include <filesystem>
#include <map>
#include <mutex>

#include "dtrust/sandbox/sandbox.h"

namespace dtrust::sandbox {

// In-memory store. Thread-safe; each operation is atomic.
class MemoryStore : public KeyValueStore {
 public:
  std::optional<Bytes> get(ByteView key) const override;
  void put(ByteView key, ByteView value) override;
  bool erase(ByteView key) override;

  std::map<Bytes, Bytes> snapshot() const;
  size_t size() const;

 protected:
  mutable std::mutex mu_;
  std::map<Bytes, Bytes> map_;
};

// Store persisted as an append-only journal of put/delete records. Every
// mutation is durable before the call returns. A torn final record (from a
// crash mid-write) is discarded on open; any other damage throws
// StoreCorrupted. The journal is rewritten once dead records dominate it.
class JournalStore : public MemoryStore {
 public:
  explicit JournalStore(std::filesystem::path path, bool sync = true);
  ~JournalStore() override;

  void put(ByteView key, ByteView value) override;
  bool erase(ByteView key) override;

  const std::filesystem::path& path() const { return path_; }
  bool truncated_torn_tail() const { return truncated_; }

 private:
  void append_record(const Bytes& payload);
  void maybe_compact();

  std::filesystem::path path_;
  bool sync_;
  int fd_ = -1;
  uint64_t journal_bytes_ = 0;
  uint64_t live_bytes_ = 0;
  bool truncated_ = false;
};

class StoreCorrupted : public Error {
 public:
  using Error::Error;
};

}  // namespace dtrust::sandbox
