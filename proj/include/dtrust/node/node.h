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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>

#include "dtrust/attest/attestation.h"
#include "dtrust/node/config.h"
#include "dtrust/node/release.h"
#include "dtrust/sandbox/sandbox.h"
#include "dtrust/tlog/log.h"
#include "dtrust/tlog/signed_head.h"

namespace dtrust::node {

class UpdateRejected : public Error {
 public:
  enum class Reason : uint8_t { kSignature = 1, kRollback = 2, kLoad = 3, kStorage = 4 };

  UpdateRejected(Reason reason, const std::string& detail)
      : Error(std::string("update rejected (") + to_string(reason) + "): " + detail),
        reason_(reason),
        detail_(detail) {}
  Reason reason() const { return reason_; }
  const std::string& detail() const { return detail_; }

  static const char* to_string(Reason r);

 private:
  Reason reason_;
  std::string detail_;
};

class BadRequest : public Error {
 public:
  using Error::Error;
};

// Startup found state it cannot vouch for: a log that fails verification or
// a logged bundle that is missing or does not match its digest.
class StateVerificationFailed : public Error {
 public:
  using Error::Error;
};

struct StatusResponse {
  attest::AttestationDocument doc;
  tlog::SignedHead head;
  // Entries (known_seq, head.seq] when the request carried a known_seq that
  // lies within the log.
  std::optional<std::vector<tlog::LogEntry>> delta;
  // The node's signed head at known_seq, so a client holding a different
  // signed head for that position has equivocation evidence.
  std::optional<tlog::SignedHead> anchor;
};

enum class AppStatus : uint8_t {
  kOk = 0,
  kAppFault = 1,
  kTimeout = 2,
  kMemoryExceeded = 3,
  kHostCallError = 4,
  kNoApp = 5,
};

const char* to_string(AppStatus s);

struct AppResult {
  AppStatus status = AppStatus::kOk;
  Bytes output;
  std::string error;
  tlog::SignedHead head;
};

// Crash-injection hook: called with the name of each step of apply_update
// ("bundle_written", "appended", "signed"). Throwing from it aborts the
// update at that point, as a crash would.
using FailPoint = std::function<void(std::string_view)>;

class Node {
 public:
  // Opens (or initializes) the node's state. With a data_dir, re-verifies the
  // log and re-activates the latest logged bundle; throws
  // StateVerificationFailed if that is impossible.
  Node(NodeConfig config, std::shared_ptr<const attest::AttestationBackend> backend);
  ~Node();
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  // Loads backend identity and key material named by the config.
  static std::unique_ptr<Node> open(NodeConfig config);

  const NodeConfig& config() const { return config_; }
  ByteView domain_id() const { return as_bytes(config_.domain_id); }
  const attest::BackendIdentity& identity() const { return backend_->identity(); }
  const PublicKey& developer_pk() const { return config_.developer_pk; }

  // Throws UpdateRejected.
  tlog::SignedHead apply_update(const UpdateBundle& bundle);

  // Throws BadRequest for a malformed nonce.
  StatusResponse status(ByteView client_nonce, std::optional<uint64_t> known_seq) const;

  AppResult app_request(ByteView payload);

  tlog::SignedHead signed_head() const;
  std::vector<tlog::LogEntry> log_entries() const { return log_->entries(); }
  // Digest of the bundle currently serving requests, if any.
  std::optional<Digest> active_digest() const;

  void set_fail_point(FailPoint fp) { fail_point_ = std::move(fp); }

 private:
  struct Active;

  void activate(const Digest& digest, uint64_t version,
                std::shared_ptr<const sandbox::CompiledApp> app, const tlog::SignedHead& head);
  std::shared_ptr<const Active> current() const;
  void store_bundle(const Digest& digest, ByteView code);
  std::optional<Bytes> read_bundle(const Digest& digest) const;
  sandbox::LoadOptions load_options(const Digest& digest) const;

  NodeConfig config_;
  std::shared_ptr<const attest::AttestationBackend> backend_;
  std::unique_ptr<tlog::HashChainLog> log_;
  std::unique_ptr<sandbox::KeyValueStore> store_;
  std::map<Digest, Bytes> memory_bundles_;
  FailPoint fail_point_;

  std::mutex update_mu_;
  mutable std::mutex active_mu_;
  std::shared_ptr<const Active> active_;
};

}  // namespace dtrust::node
