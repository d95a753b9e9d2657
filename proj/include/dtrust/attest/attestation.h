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

// Pluggable attestation backends. Each simulated backend holds a per-domain
// attestation key endorsed by one of several independent "manufacturer" root
// keys; the null backend models a domain with no secure hardware.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtrust/canon/crypto.h"
#include "dtrust/tlog/log.h"
#include "dtrust/tlog/signed_head.h"

namespace dtrust::attest {

enum class BackendKind : uint8_t { kNull = 0, kSimA = 1, kSimB = 2, kSimC = 3 };

std::string_view to_string(BackendKind kind);
// Accepts "sim-a", "sim-b", "sim-c", "null". Throws Error otherwise.
BackendKind parse_backend_kind(std::string_view name);

using Nonce = std::array<uint8_t, 32>;

Nonce random_nonce();

class BadNonce : public Error {
 public:
  using Error::Error;
};

// Throws BadNonce unless exactly 32 bytes.
Nonce nonce_from_bytes(ByteView b);

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

struct BackendIdentity {
  BackendKind kind = BackendKind::kNull;
  Bytes domain_id;
  PublicKey manufacturer_pk;
  PublicKey attestation_pk;
  std::optional<Signature> endorsement;

  bool attested() const { return kind != BackendKind::kNull; }
  // encode(TAG_ENDORSE, [backend_kind, domain_id, attestation_pk])
  Bytes endorsement_message() const;
  Bytes encode() const;
  static BackendIdentity decode(ByteView in);

  bool operator==(const BackendIdentity&) const = default;
};

// The set of manufacturer root keys a client accepts, per backend kind.
class TrustRoots {
 public:
  void add(BackendKind kind, const PublicKey& pk);
  bool trusts(BackendKind kind, const PublicKey& pk) const;
  size_t size() const { return roots_.size(); }

  // One "<backend_kind> <manufacturer_pk hex>" pair per line; '#' starts a comment.
  static TrustRoots parse(std::string_view text);
  static TrustRoots load(const std::filesystem::path& path);
  std::string serialize() const;

 private:
  std::vector<std::pair<BackendKind, PublicKey>> roots_;
};

// Checks the endorsement chain of an identity against the trust roots.
// Returns an empty string on success, otherwise the failing check.
std::string check_identity(const BackendIdentity& identity, const TrustRoots& roots);

struct AttestationDocument {
  Bytes domain_id;
  BackendKind kind = BackendKind::kNull;
  Digest framework_digest;
  Digest app_digest;
  tlog::LogHead log_head;
  Nonce client_nonce{};
  std::optional<Signature> signature;

  bool unattested() const { return kind == BackendKind::kNull; }
  Bytes signing_message() const;
  Bytes encode() const;
  static AttestationDocument decode(ByteView in);

  bool operator==(const AttestationDocument&) const = default;
};

class AttestationBackend {
 public:
  virtual ~AttestationBackend() = default;

  virtual BackendKind kind() const = 0;
  virtual const BackendIdentity& identity() const = 0;

  // Throws BadNonce for a nonce that is not 32 bytes, BackendUnavailable if
  // the backend holds no key.
  virtual AttestationDocument issue(const Digest& framework_digest, const Digest& app_digest,
                                    const tlog::LogHead& log_head, ByteView client_nonce) const = 0;
  virtual tlog::SignedHead sign_head(const tlog::LogHead& head) const = 0;
};

class SimulatedManufacturer {
 public:
  SimulatedManufacturer(BackendKind kind, SigningKey root);
  static SimulatedManufacturer generate(BackendKind kind);

  BackendKind kind() const { return kind_; }
  const PublicKey& root_pk() const { return root_.public_key(); }
  const SigningKey& root_key() const { return root_; }

  BackendIdentity endorse(ByteView domain_id, const PublicKey& attestation_pk) const;

 private:
  BackendKind kind_;
  SigningKey root_;
};

class SimulatedBackend : public AttestationBackend {
 public:
  // Uninitialized: issue() and sign_head() throw BackendUnavailable.
  explicit SimulatedBackend(BackendKind kind);
  // Throws Error if the key does not match identity.attestation_pk.
  SimulatedBackend(BackendIdentity identity, SigningKey attestation_key);

  // Generates a fresh attestation key and has the manufacturer endorse it.
  static SimulatedBackend provision(const SimulatedManufacturer& manufacturer, ByteView domain_id);

  BackendKind kind() const override { return identity_.kind; }
  const BackendIdentity& identity() const override;
  AttestationDocument issue(const Digest& framework_digest, const Digest& app_digest,
                            const tlog::LogHead& log_head, ByteView client_nonce) const override;
  tlog::SignedHead sign_head(const tlog::LogHead& head) const override;

  const SigningKey& attestation_key() const;

 private:
  BackendIdentity identity_;
  std::optional<SigningKey> key_;
};

class NullBackend : public AttestationBackend {
 public:
  explicit NullBackend(ByteView domain_id);

  BackendKind kind() const override { return BackendKind::kNull; }
  const BackendIdentity& identity() const override { return identity_; }
  AttestationDocument issue(const Digest& framework_digest, const Digest& app_digest,
                            const tlog::LogHead& log_head, ByteView client_nonce) const override;
  tlog::SignedHead sign_head(const tlog::LogHead& head) const override;

 private:
  BackendIdentity identity_;
};

struct Verdict {
  enum class Status { kValid, kUnattested, kInvalid };
  Status status = Status::kInvalid;
  std::string reason;

  static Verdict valid() { return {Status::kValid, {}}; }
  static Verdict unattested() { return {Status::kUnattested, {}}; }
  static Verdict invalid(std::string why) { return {Status::kInvalid, std::move(why)}; }

  bool is_valid() const { return status == Status::kValid; }
};

std::string to_string(const Verdict& v);

// Valid iff the endorsement chains to a trust root, the document signature
// verifies and the nonce matches. Total: never throws on malformed content.
Verdict verify_document(const AttestationDocument& doc, const BackendIdentity& identity,
                        ByteView expected_nonce, const TrustRoots& trust_roots);

// Identity files hold the canonical identity encoding; attestation keys are
// ordinary key files.
void save_identity(const std::filesystem::path& path, const BackendIdentity& identity);
BackendIdentity load_identity(const std::filesystem::path& path);

}  // namespace dtrust::attest
