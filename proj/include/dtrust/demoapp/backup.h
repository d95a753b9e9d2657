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

// Client side of the secret-backup demo: audit the deployment, split the
// secret t-of-n with one share per domain, and deposit each share with the
// backup app running in that domain. Recovery fetches shares back and checks
// the result against a locally kept digest of the secret.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dtrust/auditor/auditor.h"
#include "dtrust/demoapp/shamir.h"

namespace dtrust::demoapp {

using Token = std::array<uint8_t, 32>;

// Request and reply framing understood by the backup app bundles.
namespace backup_protocol {

enum class Status : uint8_t { kOk = 'O', kNotFound = 'N', kDenied = 'D', kBadRequest = 'B' };

const char* to_string(Status s);

Bytes store_request(ByteView backup_id, const Token& token, ByteView share);
Bytes fetch_request(ByteView backup_id, const Token& token);
Bytes delete_request(ByteView backup_id, const Token& token);
Bytes version_request();

struct Reply {
  Status status = Status::kBadRequest;
  Bytes body;
};

// Throws DecodeError on an empty reply or unknown status byte.
Reply parse_reply(ByteView reply);

}  // namespace backup_protocol

class BackupError : public Error {
 public:
  using Error::Error;
};

class AuditRefused : public BackupError {
 public:
  explicit AuditRefused(auditor::AuditReport report)
      : BackupError("deployment failed its audit; refusing to deposit shares"), report_(std::move(report)) {}
  const auditor::AuditReport& report() const { return report_; }

 private:
  auditor::AuditReport report_;
};

// No subset of the fetched shares reproduces the recorded secret digest.
class IntegrityError : public BackupError {
 public:
  using BackupError::BackupError;
};

// What the client keeps locally per backup.
struct BackupRecord {
  std::string backup_id;
  unsigned threshold = 0;
  // domains[i] holds the share with x = i + 1.
  std::vector<std::string> domains;
  Digest secret_digest;
  Token token{};

  void save(const std::filesystem::path& dir) const;
  static BackupRecord load(const std::filesystem::path& dir, const std::string& backup_id);
  static std::filesystem::path path(const std::filesystem::path& dir, const std::string& backup_id);
};

struct DomainOutcome {
  backup_protocol::Status status = backup_protocol::Status::kBadRequest;
  std::string error;  // transport or app failure; empty when the app answered
};

struct PutResult {
  BackupRecord record;
  auditor::AuditReport report;
  std::map<std::string, DomainOutcome> outcomes;
  size_t stored = 0;
};

class BackupClient {
 public:
  BackupClient(auditor::DeploymentDescriptor descriptor, auditor::AuditOptions options,
               auditor::PinStore pins = {});

  // Audits first and throws AuditRefused unless the audit passes. Splits
  // with t equal to the deployment threshold. Throws BackupError if fewer
  // than t domains accept their share.
  PutResult put(const std::string& backup_id, ByteView secret, RandomSource& rng);

  // Fetches every reachable share and returns the secret whose digest
  // matches the record. Throws InsufficientShares or IntegrityError.
  Bytes recover(const BackupRecord& record);

  std::map<std::string, DomainOutcome> remove(const BackupRecord& record);

  const auditor::PinStore& pins() const { return pins_; }

 private:
  DomainOutcome call(const auditor::DomainSpec& spec, ByteView request, Bytes* body);

  auditor::DeploymentDescriptor descriptor_;
  auditor::AuditOptions options_;
  auditor::PinStore pins_;
};

}  // namespace dtrust::demoapp
