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

// Client-side auditing of a deployment. An audit queries every domain with a
// fresh nonce, checks its attestation and signed head, checks that its log
// extends what was seen last time (the pin), and evaluates the t-of-n policy.
// Nothing here throws for domain misbehavior: all of it is report content.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtrust/auditor/descriptor.h"
#include "dtrust/auditor/misbehavior.h"
#include "dtrust/auditor/pin_store.h"
#include "dtrust/node/client.h"

namespace dtrust::auditor {

enum class DomainStatus { kValid, kUnattested, kInvalid, kUnreachable };

const char* to_string(DomainStatus s);

struct DomainResult {
  std::string domain_id;
  std::string endpoint;
  attest::BackendKind backend = attest::BackendKind::kNull;
  DomainStatus status = DomainStatus::kUnreachable;
  std::string reason;

  std::optional<attest::AttestationDocument> doc;
  std::optional<tlog::SignedHead> head;
  // Version of the entry at the reported head, when the history proved it.
  std::optional<uint64_t> version;

  // True iff the reported history verifies and extends the pin.
  bool log_consistent = false;
  bool framework_matches = false;
  // Problems found beyond the attestation status, one line each.
  std::vector<std::string> findings;

  // The pin this domain advances to, set only when the history checks out.
  std::optional<Pin> new_pin;
};

struct AuditReport {
  uint32_t threshold = 0;
  std::vector<DomainResult> domains;

  size_t valid_count = 0;
  // All Valid domains run the expected framework and one app digest, equal to
  // the published release if there is one.
  bool digest_agreement = false;
  std::optional<Digest> agreed_app_digest;
  // Every Valid domain's history extends its pin.
  bool log_consistency = false;
  std::map<attest::BackendKind, size_t> backend_kinds;
  bool pass = false;

  std::vector<MisbehaviorProof> proofs;
};

// Opens a client for a domain; throwing node::Unreachable marks the domain
// unreachable.
using Connector = std::function<std::unique_ptr<node::DomainClient>(const DomainSpec&)>;

Connector tcp_connector(std::chrono::milliseconds timeout = std::chrono::seconds(10));

struct AuditOptions {
  Connector connect = tcp_connector();
  // Query domains in parallel threads.
  bool concurrent = true;
};

struct AuditOutcome {
  AuditReport report;
  PinStore pins;
};

AuditOutcome audit(const DeploymentDescriptor& descriptor, const PinStore& pins,
                   const AuditOptions& options = {});

enum class Adoption { kAdopted, kNotAdopted, kUnknown };

const char* to_string(Adoption a);

struct UpdateCheck {
  enum class Kind { kNoChange, kUpdateObserved, kInconsistent };
  Kind kind = Kind::kNoChange;
  // Set for kUpdateObserved: the newest digest seen extending a pin.
  std::optional<Digest> new_digest;
  std::optional<uint64_t> new_version;
  std::map<std::string, Adoption> adoption;
  // Domains whose history does not extend their pin (kInconsistent).
  std::vector<std::string> inconsistent;
  std::vector<MisbehaviorProof> proofs;

  AuditReport report;
  PinStore pins;
};

const char* to_string(UpdateCheck::Kind k);

UpdateCheck check_update(const DeploymentDescriptor& descriptor, const PinStore& pins,
                         const AuditOptions& options = {});

// Compares two auditors' pins for the same deployment. Every domain pinned by
// both at the same seq with different, validly signed heads yields an
// equivocation proof.
std::vector<MisbehaviorProof> cross_check_pins(const DeploymentDescriptor& descriptor,
                                               const PinStore& a, const PinStore& b);

}  // namespace dtrust::auditor
