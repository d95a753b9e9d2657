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

#include <gtest/gtest.h>

#include "dtrust/attest/attestation.h"

namespace dtrust::attest {
namespace {

struct Fixture {
  SimulatedManufacturer vendor_a = SimulatedManufacturer::generate(BackendKind::kSimA);
  SimulatedManufacturer vendor_b = SimulatedManufacturer::generate(BackendKind::kSimB);
  SimulatedBackend backend = SimulatedBackend::provision(vendor_a, as_bytes("td1"));
  TrustRoots roots;
  Digest fw = sha256(as_bytes("framework"));
  Digest app = sha256(as_bytes("app"));
  tlog::LogHead head{3, sha256(as_bytes("head"))};

  Fixture() {
    roots.add(BackendKind::kSimA, vendor_a.root_pk());
    roots.add(BackendKind::kSimB, vendor_b.root_pk());
  }
};

TEST(Issue, RoundTripVerifiesWithNonce) {
  Fixture f;
  Nonce n = random_nonce();
  AttestationDocument doc = f.backend.issue(f.fw, f.app, f.head, n);
  EXPECT_EQ(doc.client_nonce, n);
  Verdict v = verify_document(doc, f.backend.identity(), n, f.roots);
  EXPECT_TRUE(v.is_valid()) << to_string(v);
  AttestationDocument decoded = AttestationDocument::decode(doc.encode());
  EXPECT_EQ(decoded, doc);
  EXPECT_TRUE(verify_document(decoded, f.backend.identity(), n, f.roots).is_valid());
}

TEST(Issue, NullBackendIsUnattested) {
  Fixture f;
  NullBackend null(as_bytes("td0"));
  Nonce n = random_nonce();
  AttestationDocument doc = null.issue(f.fw, f.app, f.head, n);
  EXPECT_TRUE(doc.unattested());
  EXPECT_FALSE(doc.signature);
  Verdict v = verify_document(doc, null.identity(), n, f.roots);
  EXPECT_EQ(v.status, Verdict::Status::kUnattested);
  EXPECT_FALSE(null.sign_head(f.head).signature);
}

TEST(Issue, ShortNonceIsPreconditionError) {
  Fixture f;
  Bytes short_nonce(31, 0);
  EXPECT_THROW(f.backend.issue(f.fw, f.app, f.head, short_nonce), BadNonce);
}

TEST(Issue, UninitializedBackendUnavailable) {
  SimulatedBackend empty(BackendKind::kSimC);
  Nonce n = random_nonce();
  EXPECT_THROW(empty.issue(Digest(), Digest(), {}, n), BackendUnavailable);
  EXPECT_THROW(empty.sign_head({}), BackendUnavailable);
}

TEST(VerifyDocument, StaleNonceRejected) {
  Fixture f;
  Nonce old_nonce = random_nonce();
  AttestationDocument doc = f.backend.issue(f.fw, f.app, f.head, old_nonce);
  Nonce fresh = random_nonce();
  Verdict v = verify_document(doc, f.backend.identity(), fresh, f.roots);
  EXPECT_EQ(v.status, Verdict::Status::kInvalid);
  EXPECT_EQ(v.reason, "nonce mismatch");
}

TEST(VerifyDocument, UnknownManufacturerRejected) {
  Fixture f;
  SimulatedManufacturer rogue = SimulatedManufacturer::generate(BackendKind::kSimA);
  SimulatedBackend backend = SimulatedBackend::provision(rogue, as_bytes("td1"));
  Nonce n = random_nonce();
  AttestationDocument doc = backend.issue(f.fw, f.app, f.head, n);
  Verdict v = verify_document(doc, backend.identity(), n, f.roots);
  EXPECT_EQ(v.reason, "untrusted root");
  // A real root for a different backend kind does not count.
  TrustRoots wrong_kind;
  wrong_kind.add(BackendKind::kSimB, f.vendor_a.root_pk());
  EXPECT_EQ(verify_document(f.backend.issue(f.fw, f.app, f.head, n), f.backend.identity(), n,
                            wrong_kind)
                .reason,
            "untrusted root");
}

TEST(VerifyDocument, ForgedEndorsementRejected) {
  Fixture f;
  BackendIdentity id = f.backend.identity();
  id.endorsement->mutable_bytes()[0] ^= 1;
  Nonce n = random_nonce();
  AttestationDocument doc = f.backend.issue(f.fw, f.app, f.head, n);
  EXPECT_EQ(verify_document(doc, id, n, f.roots).reason, "bad endorsement");
  // Attestation key swapped under the same endorsement.
  BackendIdentity swapped = f.backend.identity();
  swapped.attestation_pk = SigningKey::generate().public_key();
  EXPECT_EQ(verify_document(doc, swapped, n, f.roots).reason, "bad endorsement");
}

TEST(VerifyDocumentProperty, EveryBoundFieldIsCovered) {
  Fixture f;
  Nonce n = random_nonce();
  const AttestationDocument doc = f.backend.issue(f.fw, f.app, f.head, n);
  auto flip = [](Digest d) {
    auto b = d.bytes();
    b[17] ^= 0x04;
    return Digest(b);
  };
  std::vector<std::function<void(AttestationDocument&)>> mutations = {
      [&](AttestationDocument& d) { d.framework_digest = flip(d.framework_digest); },
      [&](AttestationDocument& d) { d.app_digest = flip(d.app_digest); },
      [&](AttestationDocument& d) { d.log_head.head = flip(d.log_head.head); },
      [&](AttestationDocument& d) { d.log_head.seq += 1; },
      [&](AttestationDocument& d) { d.client_nonce[0] ^= 1; },
      [&](AttestationDocument& d) { d.domain_id = to_bytes("td9"); },
      [&](AttestationDocument& d) { d.kind = BackendKind::kSimB; },
      [&](AttestationDocument& d) { d.signature->mutable_bytes()[10] ^= 1; },
      [&](AttestationDocument& d) { d.signature.reset(); },
  };
  for (size_t i = 0; i < mutations.size(); ++i) {
    AttestationDocument m = doc;
    mutations[i](m);
    // Expected nonce stays the original one.
    Verdict v = verify_document(m, f.backend.identity(), n, f.roots);
    EXPECT_EQ(v.status, Verdict::Status::kInvalid) << "mutation " << i;
  }
}

TEST(VerifyDocumentProperty, Freshness) {
  Fixture f;
  for (int i = 0; i < 50; ++i) {
    Nonce a = random_nonce();
    Nonce b = random_nonce();
    ASSERT_NE(a, b);
    AttestationDocument doc = f.backend.issue(f.fw, f.app, f.head, a);
    EXPECT_FALSE(verify_document(doc, f.backend.identity(), b, f.roots).is_valid());
  }
}

TEST(Identity, EncodeDecodeAndSignedHeads) {
  Fixture f;
  const BackendIdentity& id = f.backend.identity();
  EXPECT_EQ(BackendIdentity::decode(id.encode()), id);
  EXPECT_EQ(check_identity(id, f.roots), "");
  tlog::SignedHead sh = f.backend.sign_head(f.head);
  EXPECT_TRUE(tlog::verify_signed_head(sh, id.attestation_pk));
  EXPECT_EQ(sh.domain_id, to_bytes("td1"));
}

TEST(Identity, KeyMustMatch) {
  Fixture f;
  EXPECT_THROW(SimulatedBackend(f.backend.identity(), SigningKey::generate()), Error);
}

TEST(TrustRootsFile, ParseAndSerialize) {
  Fixture f;
  std::string text = "# roots\nsim-a " + f.vendor_a.root_pk().hex() + "\n\nsim-b " +
                     f.vendor_b.root_pk().hex() + "  # vendor b\n";
  TrustRoots parsed = TrustRoots::parse(text);
  EXPECT_EQ(parsed.size(), 2u);
  EXPECT_TRUE(parsed.trusts(BackendKind::kSimA, f.vendor_a.root_pk()));
  EXPECT_FALSE(parsed.trusts(BackendKind::kSimA, f.vendor_b.root_pk()));
  EXPECT_EQ(TrustRoots::parse(parsed.serialize()).size(), 2u);
  EXPECT_THROW(TrustRoots::parse("sim-z abcd\n"), Error);
  EXPECT_THROW(TrustRoots::parse("sim-a\n"), Error);
  EXPECT_THROW(TrustRoots::parse("null " + f.vendor_a.root_pk().hex()), Error);
}

TEST(BackendKindNames, RoundTrip) {
  for (auto k : {BackendKind::kNull, BackendKind::kSimA, BackendKind::kSimB, BackendKind::kSimC}) {
    EXPECT_EQ(parse_backend_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_backend_kind("sgx"), Error);
}

}  // namespace
}  // namespace dtrust::attest
