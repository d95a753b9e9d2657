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

#include <optional>

#include "dtrust/canon/crypto.h"
#include "dtrust/tlog/log.h"

namespace dtrust::tlog {

// A log head signed by a domain's attestation key. Unattested domains emit
// heads with no signature.
struct SignedHead {
  Bytes domain_id;
  LogHead head;
  std::optional<Signature> signature;

  // encode(TAG_HEAD, [domain_id, seq, head])
  Bytes signing_message() const;
  Bytes encode() const;
  static SignedHead decode(ByteView in);

  bool operator==(const SignedHead&) const = default;
};

SignedHead sign_head(const SigningKey& key, ByteView domain_id, const LogHead& head);
bool verify_signed_head(const SignedHead& sh, const PublicKey& pk);

struct EquivocationProof {
  Bytes domain_id;
  SignedHead a;
  SignedHead b;

  Bytes encode() const;
  static EquivocationProof decode(ByteView in);
};

enum class NotEquivocationReason { kDifferentDomains, kDifferentSeq, kEqualHeads, kBadSignature };

const char* to_string(NotEquivocationReason r);

class NotEquivocation : public Error {
 public:
  explicit NotEquivocation(NotEquivocationReason r)
      : Error(std::string("not an equivocation: ") + to_string(r)), reason_(r) {}
  NotEquivocationReason reason() const { return reason_; }

 private:
  NotEquivocationReason reason_;
};

// Orders the two heads canonically so equal inputs give identical proof bytes.
EquivocationProof make_equivocation_proof(const SignedHead& a, const SignedHead& b,
                                          const PublicKey& domain_attestation_pk);

bool verify_equivocation(const EquivocationProof& proof, const PublicKey& domain_attestation_pk);

}  // namespace dtrust::tlog
