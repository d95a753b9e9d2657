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

#include "dtrust/auditor/misbehavior.h"

#include "dtrust/canon/encoding.h"

namespace dtrust::auditor {

Bytes DigestMismatchProof::encode() const {
  return Encoder(Tag::kDigestMismatchProof).bytes(doc.encode()).bytes(release.encode()).finish();
}

DigestMismatchProof DigestMismatchProof::decode(ByteView in) {
  Decoder dec(in, Tag::kDigestMismatchProof);
  DigestMismatchProof p;
  p.doc = attest::AttestationDocument::decode(dec.bytes());
  p.release = node::PublishedRelease::decode(dec.bytes());
  dec.finish();
  return p;
}

const char* to_string(MisbehaviorProof::Kind kind) {
  switch (kind) {
    case MisbehaviorProof::Kind::kEquivocation: return "equivocation";
    case MisbehaviorProof::Kind::kDigestMismatch: return "digest-mismatch";
  }
  return "unknown";
}

Bytes MisbehaviorProof::encode() const {
  Bytes body = std::visit([](const auto& e) { return e.encode(); }, evidence);
  return Encoder(Tag::kMisbehaviorProof)
      .u64(static_cast<uint64_t>(kind()))
      .bytes(identity.encode())
      .bytes(body)
      .finish();
}

MisbehaviorProof MisbehaviorProof::decode(ByteView in) {
  Decoder dec(in, Tag::kMisbehaviorProof);
  uint64_t kind = dec.u64();
  MisbehaviorProof p;
  p.identity = attest::BackendIdentity::decode(dec.bytes());
  Bytes body = dec.bytes();
  dec.finish();
  switch (kind) {
    case static_cast<uint64_t>(Kind::kEquivocation):
      p.evidence = tlog::EquivocationProof::decode(body);
      break;
    case static_cast<uint64_t>(Kind::kDigestMismatch):
      p.evidence = DigestMismatchProof::decode(body);
      break;
    default:
      throw DecodeError("unknown misbehavior kind " + std::to_string(kind));
  }
  return p;
}

namespace {

std::string check(const tlog::EquivocationProof& e, const attest::BackendIdentity& id) {
  if (e.domain_id != id.domain_id) return "proof names a different domain than the identity";
  if (!tlog::verify_equivocation(e, id.attestation_pk)) return "heads do not form an equivocation";
  return {};
}

std::string check(const DigestMismatchProof& m, const attest::BackendIdentity& id,
                  const PublicKey& developer_pk) {
  if (m.doc.domain_id != id.domain_id) return "document names a different domain than the identity";
  if (m.doc.kind != id.kind) return "document backend differs from the identity";
  if (!m.doc.signature || !verify(id.attestation_pk, m.doc.signing_message(), *m.doc.signature)) {
    return "document signature does not verify";
  }
  if (!node::verify_release(developer_pk, m.release)) return "release signature does not verify";
  if (m.doc.app_digest == m.release.app_digest) return "digests match";
  return {};
}

}  // namespace

std::string check_misbehavior(const MisbehaviorProof& proof, const attest::TrustRoots& roots,
                              const PublicKey& developer_pk) {
  if (std::string why = attest::check_identity(proof.identity, roots); !why.empty()) {
    return "identity: " + why;
  }
  try {
    if (const auto* e = std::get_if<tlog::EquivocationProof>(&proof.evidence)) {
      return check(*e, proof.identity);
    }
    return check(std::get<DigestMismatchProof>(proof.evidence), proof.identity, developer_pk);
  } catch (const std::exception& e) {
    return std::string("malformed proof: ") + e.what();
  }
}

}  // namespace dtrust::auditor
