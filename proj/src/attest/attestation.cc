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

#include "dtrust/attest/attestation.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dtrust/canon/encoding.h"

namespace dtrust::attest {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kNull: return "null";
    case BackendKind::kSimA: return "sim-a";
    case BackendKind::kSimB: return "sim-b";
    case BackendKind::kSimC: return "sim-c";
  }
  return "unknown";
}

BackendKind parse_backend_kind(std::string_view name) {
  for (BackendKind k : {BackendKind::kNull, BackendKind::kSimA, BackendKind::kSimB,
                        BackendKind::kSimC}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown backend kind '" + std::string(name) + "'");
}

namespace {

BackendKind kind_from_u64(uint64_t v) {
  if (v > 3) throw DecodeError("invalid backend kind " + std::to_string(v));
  return static_cast<BackendKind>(v);
}

void put_optional_sig(Encoder& enc, const std::optional<Signature>& sig) {
  if (sig) {
    enc.bytes(sig->view());
  } else {
    enc.bytes(ByteView());
  }
}

std::optional<Signature> get_optional_sig(Decoder& dec) {
  Bytes b = dec.bytes();
  if (b.empty()) return std::nullopt;
  return Signature::from_bytes(b);
}

}  // namespace

Nonce random_nonce() {
  Nonce n;
  random_bytes(n);
  return n;
}

Nonce nonce_from_bytes(ByteView b) {
  if (b.size() != 32) {
    throw BadNonce("nonce must be 32 bytes, got " + std::to_string(b.size()));
  }
  Nonce n;
  std::copy(b.begin(), b.end(), n.begin());
  return n;
}

Bytes BackendIdentity::endorsement_message() const {
  return Encoder(Tag::kEndorsement)
      .u64(static_cast<uint64_t>(kind))
      .bytes(domain_id)
      .bytes(attestation_pk.view())
      .finish();
}

Bytes BackendIdentity::encode() const {
  Encoder enc(Tag::kBackendIdentity);
  enc.u64(static_cast<uint64_t>(kind))
      .bytes(domain_id)
      .bytes(manufacturer_pk.view())
      .bytes(attestation_pk.view());
  put_optional_sig(enc, endorsement);
  return enc.finish();
}

BackendIdentity BackendIdentity::decode(ByteView in) {
  Decoder dec(in, Tag::kBackendIdentity);
  BackendIdentity id;
  id.kind = kind_from_u64(dec.u64());
  id.domain_id = dec.bytes();
  id.manufacturer_pk = PublicKey::from_bytes(dec.bytes());
  id.attestation_pk = PublicKey::from_bytes(dec.bytes());
  id.endorsement = get_optional_sig(dec);
  dec.finish();
  return id;
}

void TrustRoots::add(BackendKind kind, const PublicKey& pk) {
  if (!trusts(kind, pk)) roots_.emplace_back(kind, pk);
}

bool TrustRoots::trusts(BackendKind kind, const PublicKey& pk) const {
  return std::find(roots_.begin(), roots_.end(), std::make_pair(kind, pk)) != roots_.end();
}

TrustRoots TrustRoots::parse(std::string_view text) {
  TrustRoots roots;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string kind, hex, extra;
    if (!(fields >> kind)) continue;
    if (!(fields >> hex) || (fields >> extra)) {
      throw Error("trust roots line " + std::to_string(lineno) +
                  ": expected '<backend_kind> <manufacturer_pk hex>'");
    }
    BackendKind k = parse_backend_kind(kind);
    if (k == BackendKind::kNull) {
      throw Error("trust roots line " + std::to_string(lineno) + ": null backend has no root");
    }
    roots.add(k, PublicKey::from_hex(hex));
  }
  return roots;
}

TrustRoots TrustRoots::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read trust roots file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string TrustRoots::serialize() const {
  std::string out;
  for (const auto& [kind, pk] : roots_) {
    out += std::string(to_string(kind)) + " " + pk.hex() + "\n";
  }
  return out;
}

std::string check_identity(const BackendIdentity& identity, const TrustRoots& roots) {
  if (!identity.attested()) return "unattested backend";
  if (!roots.trusts(identity.kind, identity.manufacturer_pk)) return "untrusted root";
  if (!identity.endorsement ||
      !verify(identity.manufacturer_pk, identity.endorsement_message(), *identity.endorsement)) {
    return "bad endorsement";
  }
  return {};
}

Bytes AttestationDocument::signing_message() const {
  return Encoder(Tag::kAttestationDoc)
      .bytes(domain_id)
      .u64(static_cast<uint64_t>(kind))
      .digest(framework_digest)
      .digest(app_digest)
      .u64(log_head.seq)
      .digest(log_head.head)
      .raw32(client_nonce)
      .finish();
}

Bytes AttestationDocument::encode() const {
  Encoder enc(Tag::kAttestationDoc);
  enc.bytes(domain_id)
      .u64(static_cast<uint64_t>(kind))
      .digest(framework_digest)
      .digest(app_digest)
      .u64(log_head.seq)
      .digest(log_head.head)
      .raw32(client_nonce);
  put_optional_sig(enc, signature);
  return enc.finish();
}

AttestationDocument AttestationDocument::decode(ByteView in) {
  Decoder dec(in, Tag::kAttestationDoc);
  AttestationDocument doc;
  doc.domain_id = dec.bytes();
  doc.kind = kind_from_u64(dec.u64());
  doc.framework_digest = dec.digest();
  doc.app_digest = dec.digest();
  doc.log_head.seq = dec.u64();
  doc.log_head.head = dec.digest();
  doc.client_nonce = dec.raw32();
  doc.signature = get_optional_sig(dec);
  dec.finish();
  return doc;
}

SimulatedManufacturer::SimulatedManufacturer(BackendKind kind, SigningKey root)
    : kind_(kind), root_(std::move(root)) {
  if (kind == BackendKind::kNull) throw Error("the null backend has no manufacturer");
}

SimulatedManufacturer SimulatedManufacturer::generate(BackendKind kind) {
  return SimulatedManufacturer(kind, SigningKey::generate());
}

BackendIdentity SimulatedManufacturer::endorse(ByteView domain_id,
                                               const PublicKey& attestation_pk) const {
  BackendIdentity id;
  id.kind = kind_;
  id.domain_id.assign(domain_id.begin(), domain_id.end());
  id.manufacturer_pk = root_.public_key();
  id.attestation_pk = attestation_pk;
  id.endorsement = root_.sign(id.endorsement_message());
  return id;
}

SimulatedBackend::SimulatedBackend(BackendKind kind) { identity_.kind = kind; }

SimulatedBackend::SimulatedBackend(BackendIdentity identity, SigningKey attestation_key)
    : identity_(std::move(identity)), key_(std::move(attestation_key)) {
  if (!identity_.attested()) throw Error("simulated backend requires an attested kind");
  if (key_->public_key() != identity_.attestation_pk) {
    throw Error("attestation key does not match identity");
  }
}

SimulatedBackend SimulatedBackend::provision(const SimulatedManufacturer& manufacturer,
                                             ByteView domain_id) {
  SigningKey key = SigningKey::generate();
  BackendIdentity id = manufacturer.endorse(domain_id, key.public_key());
  return SimulatedBackend(std::move(id), std::move(key));
}

const BackendIdentity& SimulatedBackend::identity() const {
  if (!key_) throw BackendUnavailable("attestation backend not initialized");
  return identity_;
}

const SigningKey& SimulatedBackend::attestation_key() const {
  if (!key_) throw BackendUnavailable("attestation backend not initialized");
  return *key_;
}

AttestationDocument SimulatedBackend::issue(const Digest& framework_digest,
                                            const Digest& app_digest,
                                            const tlog::LogHead& log_head,
                                            ByteView client_nonce) const {
  Nonce nonce = nonce_from_bytes(client_nonce);
  const SigningKey& key = attestation_key();
  AttestationDocument doc;
  doc.domain_id = identity_.domain_id;
  doc.kind = identity_.kind;
  doc.framework_digest = framework_digest;
  doc.app_digest = app_digest;
  doc.log_head = log_head;
  doc.client_nonce = nonce;
  doc.signature = key.sign(doc.signing_message());
  return doc;
}

tlog::SignedHead SimulatedBackend::sign_head(const tlog::LogHead& head) const {
  return tlog::sign_head(attestation_key(), identity_.domain_id, head);
}

NullBackend::NullBackend(ByteView domain_id) {
  identity_.kind = BackendKind::kNull;
  identity_.domain_id.assign(domain_id.begin(), domain_id.end());
}

AttestationDocument NullBackend::issue(const Digest& framework_digest, const Digest& app_digest,
                                       const tlog::LogHead& log_head,
                                       ByteView client_nonce) const {
  AttestationDocument doc;
  doc.domain_id = identity_.domain_id;
  doc.kind = BackendKind::kNull;
  doc.framework_digest = framework_digest;
  doc.app_digest = app_digest;
  doc.log_head = log_head;
  doc.client_nonce = nonce_from_bytes(client_nonce);
  return doc;
}

tlog::SignedHead NullBackend::sign_head(const tlog::LogHead& head) const {
  return {identity_.domain_id, head, std::nullopt};
}

std::string to_string(const Verdict& v) {
  switch (v.status) {
    case Verdict::Status::kValid: return "Valid";
    case Verdict::Status::kUnattested: return "Unattested";
    case Verdict::Status::kInvalid: return "Invalid(" + v.reason + ")";
  }
  return "unknown";
}

Verdict verify_document(const AttestationDocument& doc, const BackendIdentity& identity,
                        ByteView expected_nonce, const TrustRoots& trust_roots) {
  if (!identity.attested()) return Verdict::unattested();
  if (doc.kind != identity.kind) return Verdict::invalid("backend kind mismatch");
  if (doc.domain_id != identity.domain_id) return Verdict::invalid("domain mismatch");
  if (std::string why = check_identity(identity, trust_roots); !why.empty()) {
    return Verdict::invalid(why);
  }
  if (!doc.signature || !verify(identity.attestation_pk, doc.signing_message(), *doc.signature)) {
    return Verdict::invalid("bad signature");
  }
  if (expected_nonce.size() != doc.client_nonce.size() ||
      !std::equal(expected_nonce.begin(), expected_nonce.end(), doc.client_nonce.begin())) {
    return Verdict::invalid("nonce mismatch");
  }
  return Verdict::valid();
}

void save_identity(const std::filesystem::path& path, const BackendIdentity& identity) {
  std::ofstream f(path, std::ios::trunc);
  f << to_hex(identity.encode()) << "\n";
  if (!f) throw Error("cannot write identity file " + path.string());
}

BackendIdentity load_identity(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read identity file " + path.string());
  std::string line;
  std::getline(f, line);
  return BackendIdentity::decode(from_hex(line));
}

}  // namespace dtrust::attest
