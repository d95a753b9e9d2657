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

// Transferable evidence that a domain misbehaved. A proof embeds every signed
// artifact needed to check it, so anyone holding the manufacturer trust roots
// and the developer key can verify it offline.

#include <string>
#include <variant>

#include "dtrust/attest/attestation.h"
#include "dtrust/node/release.h"
#include "dtrust/tlog/signed_head.h"

namespace dtrust::auditor {

// A valid attestation document whose app digest differs from the digest in
// a developer-signed release.
struct DigestMismatchProof {
  attest::AttestationDocument doc;
  node::PublishedRelease release;

  Bytes encode() const;
  static DigestMismatchProof decode(ByteView in);
  bool operator==(const DigestMismatchProof&) const = default;
};

struct MisbehaviorProof {
  enum class Kind : uint8_t { kEquivocation = 1, kDigestMismatch = 2 };

  attest::BackendIdentity identity;
  std::variant<tlog::EquivocationProof, DigestMismatchProof> evidence;

  Kind kind() const {
    return evidence.index() == 0 ? Kind::kEquivocation : Kind::kDigestMismatch;
  }
  std::string domain_id() const { return dtrust::to_string(identity.domain_id); }

  // encode(TAG_MISBEHAVIOR, [kind, identity, evidence])
  Bytes encode() const;
  static MisbehaviorProof decode(ByteView in);
};

const char* to_string(MisbehaviorProof::Kind kind);

// Returns an empty string if the proof verifies, otherwise the first failing
// check. Never throws on malformed content.
std::string check_misbehavior(const MisbehaviorProof& proof, const attest::TrustRoots& roots,
                              const PublicKey& developer_pk);

inline bool verify_misbehavior(const MisbehaviorProof& proof, const attest::TrustRoots& roots,
                               const PublicKey& developer_pk) {
  return check_misbehavior(proof, roots, developer_pk).empty();
}

}  // namespace dtrust::auditor
