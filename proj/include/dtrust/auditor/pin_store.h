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
#include <optional>
#include <string>

#include "dtrust/tlog/signed_head.h"

namespace dtrust::auditor {

// The last verified state of one domain: its signed head and the code digest
// and version of the entry at that head.
struct Pin {
  tlog::SignedHead head;
  Digest code_digest;
  uint64_t version = 0;

  bool operator==(const Pin&) const = default;
};

class PinStore {
 public:
  const Pin* find(const std::string& domain_id) const;
  // Replaces the pin. Throws Error if the new pin is at a lower seq than the
  // current one; proving extension is the caller's job.
  void advance(const std::string& domain_id, Pin pin);

  const std::map<std::string, Pin>& pins() const { return pins_; }
  size_t size() const { return pins_.size(); }
  bool empty() const { return pins_.empty(); }

  Bytes encode() const;
  static PinStore decode(ByteView in);
  // A missing file is an empty store; saving replaces the file atomically.
  static PinStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const PinStore&) const = default;

 private:
  std::map<std::string, Pin> pins_;
};

}  // namespace dtrust::auditor
