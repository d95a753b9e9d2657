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

#include "dtrust/sim/deployment.h"

#include "dtrust/apps/catalog.h"

namespace dtrust::sim {

namespace {

class UnreachableDomain : public node::DomainClient {
 public:
  explicit UnreachableDomain(std::string id) : id_(std::move(id)) {}
  node::StatusResponse status(ByteView, std::optional<uint64_t>) override { fail(); }
  tlog::SignedHead update(const node::UpdateBundle&) override { fail(); }
  node::AppResult app_request(ByteView) override { fail(); }
  node::wire::IdentityResponse identity() override { fail(); }

 private:
  [[noreturn]] void fail() const { throw node::Unreachable(id_ + ": connection refused"); }
  std::string id_;
};

// Forwards to a shared script without transferring ownership.
class ScriptHandle : public node::DomainClient {
 public:
  explicit ScriptHandle(std::shared_ptr<ScriptedDomain> s) : s_(std::move(s)) {}
  node::StatusResponse status(ByteView nonce, std::optional<uint64_t> known) override {
    return s_->status(nonce, known);
  }
  tlog::SignedHead update(const node::UpdateBundle& b) override { return s_->update(b); }
  node::AppResult app_request(ByteView p) override { return s_->app_request(p); }
  node::wire::IdentityResponse identity() override { return s_->identity(); }

 private:
  std::shared_ptr<ScriptedDomain> s_;
};

}  // namespace

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kHonest: return "honest";
    case Strategy::kWrongDigest: return "wrong-digest";
    case Strategy::kForkedLog: return "forked-log";
    case Strategy::kStaleRollback: return "stale-rollback";
    case Strategy::kUnreachable: return "unreachable";
  }
  return "unknown";
}

ScriptedDomain::ScriptedDomain(std::shared_ptr<const attest::AttestationBackend> backend,
                               Digest framework_digest, std::vector<tlog::LogEntry> entries,
                               std::optional<Digest> claimed_app_digest)
    : backend_(std::move(backend)),
      framework_digest_(framework_digest),
      entries_(std::move(entries)),
      claimed_(claimed_app_digest) {
  for (const auto& e : entries_) heads_.push_back(tlog::LogHead::of(e));
}

node::StatusResponse ScriptedDomain::status(ByteView nonce, std::optional<uint64_t> known_seq) {
  tlog::LogHead head = heads_.empty() ? tlog::LogHead::empty_log() : heads_.back();
  Digest app = entries_.empty() ? Digest::zero() : entries_.back().code_digest;
  if (claimed_) app = *claimed_;

  node::StatusResponse r;
  r.doc = backend_->issue(framework_digest_, app, head, nonce);
  r.head = backend_->sign_head(head);
  if (known_seq) {
    uint64_t k = *known_seq;
    if (k == tlog::kEmptySeq) {
      r.delta = entries_;
      r.anchor = backend_->sign_head(tlog::LogHead::empty_log());
    } else if (k < entries_.size()) {
      r.delta = std::vector<tlog::LogEntry>(entries_.begin() + static_cast<ptrdiff_t>(k) + 1, entries_.end());
      r.anchor = backend_->sign_head(heads_[k]);
    }
  }
  return r;
}

tlog::SignedHead ScriptedDomain::update(const node::UpdateBundle&) {
  throw node::RemoteError(node::wire::ErrorCode::kInternal, "scripted domain takes no updates");
}

node::AppResult ScriptedDomain::app_request(ByteView) {
  tlog::LogHead head = heads_.empty() ? tlog::LogHead::empty_log() : heads_.back();
  return {node::AppStatus::kNoApp, {}, "scripted domain runs no app", backend_->sign_head(head)};
}

node::wire::IdentityResponse ScriptedDomain::identity() {
  return {backend_->identity(), framework_digest_};
}

Deployment::Deployment(Options options)
    : options_(std::move(options)),
      developer_(SigningKey::generate()),
      framework_digest_(sha256(as_bytes("dtrust simulated framework"))) {
  for (auto kind : {attest::BackendKind::kSimA, attest::BackendKind::kSimB, attest::BackendKind::kSimC}) {
    manufacturers_.push_back(attest::SimulatedManufacturer::generate(kind));
    roots_.add(kind, manufacturers_.back().root_pk());
  }
  for (size_t i = 0; i < options_.kinds.size(); ++i) {
    Domain d;
    d.id = "domain-" + std::to_string(i);
    d.kind = options_.kinds[i];
    if (d.kind == attest::BackendKind::kNull) {
      d.backend = std::make_shared<attest::NullBackend>(as_bytes(d.id));
    } else {
      const auto& m = manufacturers_[static_cast<size_t>(d.kind) - 1];
      d.backend = std::make_shared<attest::SimulatedBackend>(
          attest::SimulatedBackend::provision(m, as_bytes(d.id)));
    }
    node::NodeConfig c;
    c.domain_id = d.id;
    c.backend = d.kind;
    c.developer_pk = developer_.public_key();
    c.framework_digest = framework_digest_;
    c.engine = options_.engine;
    d.node = std::make_unique<node::Node>(c, d.backend);
    domains_.push_back(std::move(d));
  }
}

node::UpdateBundle Deployment::release(std::string_view app, uint64_t version) {
  node::UpdateBundle b = node::sign_update(developer_, apps::bundle(app).code, version);
  for (auto& d : domains_) d.node->apply_update(b);
  latest_ = b;
  return b;
}

std::vector<tlog::LogEntry> Deployment::forked_history(const std::vector<tlog::LogEntry>& real,
                                                       std::mt19937_64& rng) const {
  // Every fork entry carries a genuine developer signature, so only the
  // history itself is wrong. The fork diverges at or before the last entry
  // and is at least as long as the real log.
  std::vector<node::UpdateBundle> bundles;
  const size_t diverge = real.empty() ? 0 : rng() % real.size();
  uint64_t version = 0;
  for (size_t i = 0; i < diverge; ++i) {
    version = real[i].version;
    bundles.push_back({{}, version, real[i].update_sig});
  }
  static const char* kAlternates[] = {"echo", "faulty", "backup_v1"};
  const size_t extra = real.size() - diverge + rng() % 2;
  for (size_t i = 0; i < std::max<size_t>(extra, 1); ++i) {
    bundles.push_back(node::sign_update(developer_, apps::bundle(kAlternates[rng() % 3]).code, ++version));
  }
  tlog::HashChainLog log;
  for (size_t i = 0; i < bundles.size(); ++i) {
    const Digest digest = i < diverge ? real[i].code_digest : bundles[i].app_digest();
    log.append(digest, bundles[i].version, bundles[i].dev_sig, i < diverge ? real[i].timestamp : 1);
  }
  return log.entries();
}

void Deployment::corrupt(size_t i, Strategy s, std::mt19937_64& rng) {
  Domain& d = domains_[i];
  d.strategy = s;
  d.script.reset();
  std::vector<tlog::LogEntry> real = d.node->log_entries();
  switch (s) {
    case Strategy::kHonest:
    case Strategy::kUnreachable:
      break;
    case Strategy::kWrongDigest: {
      Digest wrong = sha256(as_bytes("malicious build " + std::to_string(rng())));
      if (real.size() > 1 && rng() % 2) wrong = real.front().code_digest;
      d.script = std::make_shared<ScriptedDomain>(d.backend, framework_digest_, real, wrong);
      break;
    }
    case Strategy::kForkedLog:
      d.script = std::make_shared<ScriptedDomain>(d.backend, framework_digest_, forked_history(real, rng));
      break;
    case Strategy::kStaleRollback: {
      size_t keep = real.empty() ? 0 : rng() % real.size();
      real.resize(keep);
      d.script = std::make_shared<ScriptedDomain>(d.backend, framework_digest_, std::move(real));
      break;
    }
  }
}

auditor::DeploymentDescriptor Deployment::descriptor() const {
  auditor::DeploymentDescriptor desc;
  desc.threshold = options_.threshold;
  desc.framework_digest = framework_digest_;
  desc.developer_pk = developer_.public_key();
  desc.trust_roots = roots_;
  if (latest_) desc.release = node::PublishedRelease::of(*latest_);
  for (const Domain& d : domains_) {
    desc.domains.push_back({d.id, "sim:" + d.id, d.backend->identity()});
  }
  return desc;
}

std::unique_ptr<node::DomainClient> Deployment::client(size_t i) {
  Domain& d = domains_[i];
  if (d.strategy == Strategy::kUnreachable) return std::make_unique<UnreachableDomain>(d.id);
  if (d.script) return std::make_unique<ScriptHandle>(d.script);
  return std::make_unique<node::LocalClient>(*d.node);
}

auditor::AuditOptions Deployment::audit_options(bool concurrent) {
  auditor::AuditOptions opt;
  opt.concurrent = concurrent;
  opt.connect = [this](const auditor::DomainSpec& spec) -> std::unique_ptr<node::DomainClient> {
    for (size_t i = 0; i < domains_.size(); ++i) {
      if (domains_[i].id == spec.domain_id) return client(i);
    }
    throw node::Unreachable("unknown domain " + spec.domain_id);
  };
  return opt;
}

}  // namespace dtrust::sim
