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

// In-process deployments of n nodes for tests, the acceptance checks and the
// demo commands. Each domain can be switched to an adversarial strategy; an
// adversary holds the domain's real attestation key, so everything it says
// is validly signed.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dtrust/auditor/auditor.h"
#include "dtrust/node/node.h"

namespace dtrust::sim {

enum class Strategy {
  kHonest,
  // Attests to a code digest other than the one it logged.
  kWrongDigest,
  // Serves a different history that reaches the same length or longer.
  kForkedLog,
  // Serves an older prefix of its real history.
  kStaleRollback,
  kUnreachable,
};

const char* to_string(Strategy s);

// A domain that answers status queries from a fixed list of log entries,
// exactly as a node holding that log would, optionally misreporting the
// attested app digest.
class ScriptedDomain : public node::DomainClient {
 public:
  ScriptedDomain(std::shared_ptr<const attest::AttestationBackend> backend, Digest framework_digest,
                 std::vector<tlog::LogEntry> entries, std::optional<Digest> claimed_app_digest = {});

  node::StatusResponse status(ByteView nonce, std::optional<uint64_t> known_seq) override;
  tlog::SignedHead update(const node::UpdateBundle& bundle) override;
  node::AppResult app_request(ByteView payload) override;
  node::wire::IdentityResponse identity() override;

 private:
  std::shared_ptr<const attest::AttestationBackend> backend_;
  Digest framework_digest_;
  std::vector<tlog::LogEntry> entries_;
  std::vector<tlog::LogHead> heads_;
  std::optional<Digest> claimed_;
};

class Deployment {
 public:
  struct Options {
    std::vector<attest::BackendKind> kinds;
    uint32_t threshold = 1;
    sandbox::Engine engine = sandbox::Engine::kInterpreter;
  };

  explicit Deployment(Options options);

  size_t n() const { return domains_.size(); }
  const SigningKey& developer() const { return developer_; }
  const attest::TrustRoots& trust_roots() const { return roots_; }
  node::Node& node(size_t i) { return *domains_[i].node; }
  const std::string& domain_id(size_t i) const { return domains_[i].id; }
  attest::BackendKind kind(size_t i) const { return domains_[i].kind; }
  std::shared_ptr<const attest::AttestationBackend> backend(size_t i) const { return domains_[i].backend; }
  Strategy strategy(size_t i) const { return domains_[i].strategy; }

  // Signs a catalog app as the developer and applies it to every node.
  // Records it as the published release.
  node::UpdateBundle release(std::string_view app, uint64_t version);
  const std::optional<node::UpdateBundle>& latest_release() const { return latest_; }

  // Switches how domain i answers. Forks and rollbacks are built from the
  // domain's log at the time of the call; rng picks the variant.
  void corrupt(size_t i, Strategy s, std::mt19937_64& rng);

  auditor::DeploymentDescriptor descriptor() const;
  auditor::AuditOptions audit_options(bool concurrent = false);
  // A client for domain i as currently corrupted.
  std::unique_ptr<node::DomainClient> client(size_t i);

 private:
  struct Domain {
    std::string id;
    attest::BackendKind kind;
    std::shared_ptr<const attest::AttestationBackend> backend;
    std::unique_ptr<node::Node> node;
    Strategy strategy = Strategy::kHonest;
    std::shared_ptr<ScriptedDomain> script;
  };

  std::vector<tlog::LogEntry> forked_history(const std::vector<tlog::LogEntry>& real,
                                             std::mt19937_64& rng) const;

  Options options_;
  SigningKey developer_;
  Digest framework_digest_;
  std::vector<attest::SimulatedManufacturer> manufacturers_;
  attest::TrustRoots roots_;
  std::vector<Domain> domains_;
  std::optional<node::UpdateBundle> latest_;
};

}  // namespace dtrust::sim
