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

#include "dtrust/node/node.h"

#include <chrono>

#include "dtrust/canon/fileio.h"
#include "dtrust/sandbox/state_store.h"

namespace dtrust::node {

using sandbox::SandboxError;

const char* UpdateRejected::to_string(Reason r) {
  switch (r) {
    case Reason::kSignature: return "signature";
    case Reason::kRollback: return "rollback";
    case Reason::kLoad: return "load";
    case Reason::kStorage: return "storage";
  }
  return "unknown";
}

const char* to_string(AppStatus s) {
  switch (s) {
    case AppStatus::kOk: return "ok";
    case AppStatus::kAppFault: return "AppFault";
    case AppStatus::kTimeout: return "Timeout";
    case AppStatus::kMemoryExceeded: return "MemoryExceeded";
    case AppStatus::kHostCallError: return "HostCallError";
    case AppStatus::kNoApp: return "NoApp";
  }
  return "unknown";
}

// A bundle and the signed head it was activated under. Requests snapshot
// the pair, so a response never mixes one version's output with another's
// head.
struct Node::Active {
  Digest digest;
  uint64_t version = 0;
  std::shared_ptr<const sandbox::CompiledApp> app;
  tlog::SignedHead head;

  mutable std::mutex mu;
  mutable std::vector<std::unique_ptr<sandbox::SandboxInstance>> idle;
};

namespace {

AppStatus status_of(SandboxError::Kind kind) {
  switch (kind) {
    case SandboxError::Kind::kTimeout: return AppStatus::kTimeout;
    case SandboxError::Kind::kMemoryExceeded: return AppStatus::kMemoryExceeded;
    case SandboxError::Kind::kHostCall: return AppStatus::kHostCallError;
    default: return AppStatus::kAppFault;
  }
}

uint64_t now_seconds() {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count());
}

}  // namespace

Node::Node(NodeConfig config, std::shared_ptr<const attest::AttestationBackend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  if (!backend_) throw ConfigError("node requires an attestation backend");
  config_.limits.validate();
  if (backend_->kind() != config_.backend) {
    throw ConfigError("backend kind does not match config");
  }
  if (dtrust::to_string(backend_->identity().domain_id) != config_.domain_id) {
    throw ConfigError("backend identity is for a different domain");
  }
  if (config_.engine == sandbox::Engine::kAot && !sandbox::aot_available()) {
    config_.engine = sandbox::Engine::kInterpreter;
  }

  std::unique_ptr<tlog::LogStorage> storage;
  if (config_.data_dir.empty()) {
    storage = std::make_unique<tlog::MemoryLogStorage>();
    store_ = std::make_unique<sandbox::MemoryStore>();
  } else {
    std::filesystem::create_directories(config_.data_dir / "bundles");
    storage = std::make_unique<tlog::FileLogStorage>((config_.data_dir / "log.bin").string());
    try {
      store_ = std::make_unique<sandbox::JournalStore>(config_.data_dir / "state.kv");
    } catch (const sandbox::StoreCorrupted& e) {
      throw StateVerificationFailed(e.what());
    }
  }
  try {
    log_ = std::make_unique<tlog::HashChainLog>(std::move(storage));
  } catch (const tlog::LogCorrupted& e) {
    throw StateVerificationFailed(e.what());
  }

  std::vector<tlog::LogEntry> entries = log_->entries();
  tlog::LogHead head = log_->head();
  if (auto check = tlog::verify_chain(entries, head); !check) {
    throw StateVerificationFailed("log verification failed: " + check.diagnostic);
  }
  for (const tlog::LogEntry& e : entries) {
    if (!verify_release(config_.developer_pk, e.code_digest, e.version, e.update_sig)) {
      throw StateVerificationFailed("log entry " + std::to_string(e.seq) +
                                    " is not signed by the developer key");
    }
  }
  if (entries.empty()) return;

  const tlog::LogEntry& latest = entries.back();
  std::optional<Bytes> code = read_bundle(latest.code_digest);
  if (!code) {
    throw StateVerificationFailed("bundle " + latest.code_digest.hex() + " for log entry " +
                                  std::to_string(latest.seq) + " is missing");
  }
  try {
    auto app = sandbox::compile(sandbox::AppBundle::from_code(std::move(*code)), config_.limits,
                                load_options(latest.code_digest));
    activate(latest.code_digest, latest.version, std::move(app), backend_->sign_head(head));
  } catch (const SandboxError& e) {
    throw StateVerificationFailed("logged bundle no longer loads: " + std::string(e.what()));
  }
}

Node::~Node() = default;

std::unique_ptr<Node> Node::open(NodeConfig config) {
  std::shared_ptr<const attest::AttestationBackend> backend;
  if (config.backend == attest::BackendKind::kNull) {
    backend = std::make_shared<attest::NullBackend>(as_bytes(config.domain_id));
  } else {
    attest::BackendIdentity identity;
    try {
      identity = attest::load_identity(config.identity_path());
      SigningKey key = read_signing_key(config.attestation_key_path());
      backend = std::make_shared<attest::SimulatedBackend>(std::move(identity), std::move(key));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("cannot load backend key material: ") + e.what());
    }
  }
  return std::make_unique<Node>(std::move(config), std::move(backend));
}

sandbox::LoadOptions Node::load_options(const Digest& digest) const {
  sandbox::LoadOptions o;
  o.engine = config_.engine;
  o.expected_digest = digest;
  o.aot_cache_dir = config_.aot_cache_dir;
  return o;
}

void Node::store_bundle(const Digest& digest, ByteView code) {
  if (config_.data_dir.empty()) {
    memory_bundles_[digest] = Bytes(code.begin(), code.end());
    return;
  }
  write_file_atomic(config_.data_dir / "bundles" / (digest.hex() + ".bin"), code);
}

std::optional<Bytes> Node::read_bundle(const Digest& digest) const {
  if (config_.data_dir.empty()) {
    auto it = memory_bundles_.find(digest);
    if (it == memory_bundles_.end()) return std::nullopt;
    return it->second;
  }
  auto path = config_.data_dir / "bundles" / (digest.hex() + ".bin");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

void Node::activate(const Digest& digest, uint64_t version,
                    std::shared_ptr<const sandbox::CompiledApp> app, const tlog::SignedHead& head) {
  auto next = std::make_shared<Active>();
  next->digest = digest;
  next->version = version;
  next->app = std::move(app);
  next->head = head;
  std::lock_guard lock(active_mu_);
  active_ = std::move(next);
}

std::shared_ptr<const Node::Active> Node::current() const {
  std::lock_guard lock(active_mu_);
  return active_;
}

std::optional<Digest> Node::active_digest() const {
  auto a = current();
  if (!a) return std::nullopt;
  return a->digest;
}

tlog::SignedHead Node::apply_update(const UpdateBundle& bundle) {
  using Reason = UpdateRejected::Reason;
  std::lock_guard lock(update_mu_);
  const Digest digest = bundle.app_digest();

  if (!verify_release(config_.developer_pk, digest, bundle.version, bundle.dev_sig)) {
    throw UpdateRejected(Reason::kSignature, "signature does not verify under the developer key");
  }
  if (bundle.version == 0) throw UpdateRejected(Reason::kRollback, "versions start at 1");
  if (auto latest = log_->latest(); latest && bundle.version <= latest->version) {
    throw UpdateRejected(Reason::kRollback, "version " + std::to_string(bundle.version) +
                                                " does not exceed installed version " +
                                                std::to_string(latest->version));
  }

  std::shared_ptr<const sandbox::CompiledApp> app;
  try {
    app = sandbox::compile(sandbox::AppBundle::from_code(bundle.code), config_.limits,
                           load_options(digest));
  } catch (const SandboxError& e) {
    throw UpdateRejected(Reason::kLoad, e.what());
  }

  try {
    store_bundle(digest, bundle.code);
  } catch (const Error& e) {
    throw UpdateRejected(Reason::kStorage, e.what());
  }
  if (fail_point_) fail_point_("bundle_written");

  tlog::LogHead head;
  try {
    head = log_->append(digest, bundle.version, bundle.dev_sig, now_seconds());
  } catch (const tlog::RollbackRejected& e) {
    throw UpdateRejected(Reason::kRollback, e.what());
  } catch (const tlog::AppendFailed& e) {
    throw UpdateRejected(Reason::kStorage, e.what());
  }
  if (fail_point_) fail_point_("appended");

  tlog::SignedHead signed_head = backend_->sign_head(head);
  if (fail_point_) fail_point_("signed");

  activate(digest, bundle.version, std::move(app), signed_head);
  return signed_head;
}

tlog::SignedHead Node::signed_head() const { return backend_->sign_head(log_->head()); }

StatusResponse Node::status(ByteView client_nonce, std::optional<uint64_t> known_seq) const {
  if (client_nonce.size() != 32) {
    throw BadRequest("nonce must be 32 bytes, got " + std::to_string(client_nonce.size()));
  }
  // Read the head first and everything else relative to it, so a concurrent
  // append cannot produce a document whose digest and head disagree.
  tlog::LogHead head = log_->head();
  Digest app_digest;
  if (!head.empty()) {
    auto tail = log_->entries_since(head.seq == 0 ? tlog::kEmptySeq : head.seq - 1);
    app_digest = tail->front().code_digest;
  }

  StatusResponse r;
  r.doc = backend_->issue(config_.framework_digest, app_digest, head, client_nonce);
  r.head = backend_->sign_head(head);
  if (known_seq) {
    bool in_range = *known_seq == tlog::kEmptySeq || (!head.empty() && *known_seq <= head.seq);
    if (in_range) {
      auto delta = log_->entries_since(*known_seq);
      std::vector<tlog::LogEntry> trimmed;
      for (auto& e : *delta) {
        if (e.seq <= head.seq) trimmed.push_back(std::move(e));
      }
      r.delta = std::move(trimmed);
      if (auto at = log_->head_at(*known_seq)) r.anchor = backend_->sign_head(*at);
    }
  }
  return r;
}

AppResult Node::app_request(ByteView payload) {
  auto active = current();
  if (!active) {
    return {AppStatus::kNoApp, {}, "no app installed", signed_head()};
  }

  std::unique_ptr<sandbox::SandboxInstance> inst;
  {
    std::lock_guard lock(active->mu);
    if (!active->idle.empty()) {
      inst = std::move(active->idle.back());
      active->idle.pop_back();
    }
  }
  if (!inst) inst = std::make_unique<sandbox::SandboxInstance>(active->app, config_.limits, *store_);

  AppResult r;
  r.head = active->head;
  try {
    r.output = inst->handle(payload);
    r.status = AppStatus::kOk;
  } catch (const SandboxError& e) {
    // The instance is dropped; the next request gets a fresh one.
    r.status = status_of(e.kind());
    r.error = e.what();
    return r;
  }
  std::lock_guard lock(active->mu);
  active->idle.push_back(std::move(inst));
  return r;
}

}  // namespace dtrust::node
