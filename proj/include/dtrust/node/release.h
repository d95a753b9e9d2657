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

// Developer-signed code releases. The developer signs (app_digest, version);
// nodes accept an update only under the sealed developer key, and auditors
// use a published release as the reference for the expected code digest.

#include <cstdint>

#include "dtrust/canon/crypto.h"

namespace dtrust::node {

// encode(TAG_UPDATE, [app_digest, version])
Bytes update_signing_message(const Digest& app_digest, uint64_t version);

struct UpdateBundle {
  Bytes code;
  uint64_t version = 0;
  Signature dev_sig;

  Digest app_digest() const { return sha256(code); }
  Bytes encode() const;
  static UpdateBundle decode(ByteView in);
};

UpdateBundle sign_update(const SigningKey& developer_key, Bytes code, uint64_t version);

struct PublishedRelease {
  Digest app_digest;
  uint64_t version = 0;
  Signature dev_sig;

  // encode(TAG_RELEASE, [app_digest, version, dev_sig])
  Bytes encode() const;
  static PublishedRelease decode(ByteView in);
  static PublishedRelease of(const UpdateBundle& b) { return {b.app_digest(), b.version, b.dev_sig}; }

  bool operator==(const PublishedRelease&) const = default;
};

bool verify_release(const PublicKey& developer_pk, const Digest& app_digest, uint64_t version,
                    const Signature& dev_sig);
inline bool verify_release(const PublicKey& developer_pk, const PublishedRelease& r) {
  return verify_release(developer_pk, r.app_digest, r.version, r.dev_sig);
}

}  // namespace dtrust::node
