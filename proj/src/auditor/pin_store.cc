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

#include "dtrust/auditor/pin_store.h"

#include "dtrust/canon/encoding.h"
#include "dtrust/canon/fileio.h"

namespace dtrust::auditor {

const Pin* PinStore::find(const std::string& domain_id) const {
  auto it = pins_.find(domain_id);
  return it == pins_.end() ? nullptr : &it->second;
}

void PinStore::advance(const std::string& domain_id, Pin pin) {
  if (const Pin* old = find(domain_id); old && pin.head.head.size() < old->head.head.size()) {
    throw Error("pin for " + domain_id + " would move backwards");
  }
  pins_[domain_id] = std::move(pin);
}

Bytes PinStore::encode() const {
  std::vector<Bytes> records;
  for (const auto& [id, pin] : pins_) {
    records.push_back(Encoder(Tag::kHeadRecord)
                          .bytes(id)
                          .bytes(pin.head.encode())
                          .digest(pin.code_digest)
                          .u64(pin.version)
                          .finish());
  }
  return Encoder(Tag::kPinStore).list(records).finish();
}

PinStore PinStore::decode(ByteView in) {
  Decoder dec(in, Tag::kPinStore);
  PinStore store;
  for (const Bytes& rec : dec.list()) {
    Decoder r(rec, Tag::kHeadRecord);
    std::string id = r.string();
    Pin pin;
    pin.head = tlog::SignedHead::decode(r.bytes());
    pin.code_digest = r.digest();
    pin.version = r.u64();
    r.finish();
    if (!store.pins_.emplace(id, std::move(pin)).second) {
      throw DecodeError("duplicate pin for " + id);
    }
  }
  dec.finish();
  return store;
}

PinStore PinStore::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return decode(read_file(path));
}

void PinStore::save(const std::filesystem::path& path) const { write_file_atomic(path, encode()); }

}  // namespace dtrust::auditor
