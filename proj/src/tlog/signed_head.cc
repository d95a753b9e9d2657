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

#include "dtrust/tlog/signed_head.h"

#include "dtrust/canon/encoding.h"

namespace dtrust::tlog {

namespace {

void encode_signed_head_fields(Encoder& enc, const SignedHead& sh) {
  enc.bytes(sh.domain_id).u64(sh.head.seq).digest(sh.head.head);
  if (sh.signature) {
    enc.bytes(sh.signature->view());
  } else {
    enc.bytes(ByteView());
  }
}

SignedHead decode_signed_head_fields(Decoder& dec) {
  SignedHead sh;
  sh.domain_id = dec.bytes();
  sh.head.seq = dec.u64();
  sh.head.head = dec.digest();
  Bytes sig = dec.bytes();
  if (!sig.empty()) sh.signature = Signature::from_bytes(sig);
  return sh;
}

}  // namespace

Bytes SignedHead::signing_message() const {
  return Encoder(Tag::kSignedHead).bytes(domain_id).u64(head.seq).digest(head.head).finish();
}

Bytes SignedHead::encode() const {
  Encoder enc(Tag::kHeadRecord);
  encode_signed_head_fields(enc, *this);
  return enc.finish();
}

SignedHead SignedHead::decode(ByteView in) {
  Decoder dec(in, Tag::kHeadRecord);
  SignedHead sh = decode_signed_head_fields(dec);
  dec.finish();
  return sh;
}

SignedHead sign_head(const SigningKey& key, ByteView domain_id, const LogHead& head) {
  SignedHead sh{Bytes(domain_id.begin(), domain_id.end()), head, std::nullopt};
  sh.signature = key.sign(sh.signing_message());
  return sh;
}

bool verify_signed_head(const SignedHead& sh, const PublicKey& pk) {
  return sh.signature && verify(pk, sh.signing_message(), *sh.signature);
}

Bytes EquivocationProof::encode() const {
  Encoder enc(Tag::kEquivocationProof);
  enc.bytes(domain_id);
  encode_signed_head_fields(enc, a);
  encode_signed_head_fields(enc, b);
  return enc.finish();
}

EquivocationProof EquivocationProof::decode(ByteView in) {
  Decoder dec(in, Tag::kEquivocationProof);
  EquivocationProof p;
  p.domain_id = dec.bytes();
  p.a = decode_signed_head_fields(dec);
  p.b = decode_signed_head_fields(dec);
  dec.finish();
  return p;
}

const char* to_string(NotEquivocationReason r) {
  switch (r) {
    case NotEquivocationReason::kDifferentDomains: return "different domains";
    case NotEquivocationReason::kDifferentSeq: return "different seq";
    case NotEquivocationReason::kEqualHeads: return "equal heads";
    case NotEquivocationReason::kBadSignature: return "bad signature";
  }
  return "unknown";
}

EquivocationProof make_equivocation_proof(const SignedHead& a, const SignedHead& b,
                                          const PublicKey& domain_attestation_pk) {
  using R = NotEquivocationReason;
  if (a.domain_id != b.domain_id) throw NotEquivocation(R::kDifferentDomains);
  if (a.head.seq != b.head.seq) throw NotEquivocation(R::kDifferentSeq);
  if (a.head.head == b.head.head) throw NotEquivocation(R::kEqualHeads);
  if (!verify_signed_head(a, domain_attestation_pk) ||
      !verify_signed_head(b, domain_attestation_pk)) {
    throw NotEquivocation(R::kBadSignature);
  }
  EquivocationProof p{a.domain_id, a, b};
  if (b.head.head < a.head.head) std::swap(p.a, p.b);
  return p;
}

bool verify_equivocation(const EquivocationProof& proof, const PublicKey& domain_attestation_pk) {
  const SignedHead& a = proof.a;
  const SignedHead& b = proof.b;
  return a.domain_id == proof.domain_id && b.domain_id == proof.domain_id &&
         a.head.seq == b.head.seq && a.head.head != b.head.head &&
         verify_signed_head(a, domain_attestation_pk) &&
         verify_signed_head(b, domain_attestation_pk);
}

}  // namespace dtrust::tlog
