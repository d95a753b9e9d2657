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

#include "dtrust/demoapp/backup.h"

#include <json.hpp>
#include <set>

#include "dtrust/canon/fileio.h"

namespace dtrust::demoapp {

namespace backup_protocol {

namespace {

Bytes header(uint8_t op, ByteView id, const Token& token) {
  Bytes out{op};
  uint32_t len = static_cast<uint32_t>(id.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(len >> (8 * i)));
  append(out, id);
  append(out, token);
  return out;
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::kOk: return "ok";
    case Status::kNotFound: return "not-found";
    case Status::kDenied: return "denied";
    case Status::kBadRequest: return "bad-request";
  }
  return "unknown";
}

Bytes store_request(ByteView id, const Token& token, ByteView share) {
  Bytes out = header('S', id, token);
  append(out, share);
  return out;
}

Bytes fetch_request(ByteView id, const Token& token) { return header('F', id, token); }
Bytes delete_request(ByteView id, const Token& token) { return header('X', id, token); }
Bytes version_request() { return {'V'}; }

Reply parse_reply(ByteView reply) {
  if (reply.empty()) throw DecodeError("empty backup reply");
  Reply r;
  switch (reply[0]) {
    case 'O': r.status = Status::kOk; break;
    case 'N': r.status = Status::kNotFound; break;
    case 'D': r.status = Status::kDenied; break;
    case 'B': r.status = Status::kBadRequest; break;
    default: throw DecodeError("unknown backup status byte");
  }
  r.body.assign(reply.begin() + 1, reply.end());
  return r;
}

}  // namespace backup_protocol

using backup_protocol::Status;
using nlohmann::json;

std::filesystem::path BackupRecord::path(const std::filesystem::path& dir, const std::string& backup_id) {
  return dir / (to_hex(as_bytes(backup_id)) + ".json");
}

void BackupRecord::save(const std::filesystem::path& dir) const {
  json j = {{"backup_id", backup_id},
            {"threshold", threshold},
            {"domains", domains},
            {"secret_sha256", secret_digest.hex()},
            {"token", to_hex(token)}};
  std::filesystem::create_directories(dir);
  write_file_atomic(path(dir, backup_id), as_bytes(j.dump(2) + "\n"));
}

BackupRecord BackupRecord::load(const std::filesystem::path& dir, const std::string& backup_id) {
  try {
    json j = json::parse(dtrust::to_string(read_file(path(dir, backup_id))));
    BackupRecord r;
    r.backup_id = j.at("backup_id").get<std::string>();
    r.threshold = j.at("threshold").get<unsigned>();
    r.domains = j.at("domains").get<std::vector<std::string>>();
    r.secret_digest = Digest::from_hex(j.at("secret_sha256").get<std::string>());
    Bytes token = from_hex(j.at("token").get<std::string>());
    if (token.size() != r.token.size()) throw DecodeError("token must be 32 bytes");
    std::copy(token.begin(), token.end(), r.token.begin());
    return r;
  } catch (const json::exception& e) {
    throw BackupError("backup record for " + backup_id + ": " + e.what());
  }
}

BackupClient::BackupClient(auditor::DeploymentDescriptor descriptor, auditor::AuditOptions options,
                           auditor::PinStore pins)
    : descriptor_(std::move(descriptor)), options_(std::move(options)), pins_(std::move(pins)) {}

DomainOutcome BackupClient::call(const auditor::DomainSpec& spec, ByteView request, Bytes* body) {
  DomainOutcome out;
  try {
    node::AppResult r = options_.connect(spec)->app_request(request);
    if (spec.identity.attested() && !tlog::verify_signed_head(r.head, spec.identity.attestation_pk)) {
      out.error = "response head does not verify";
      return out;
    }
    if (r.status != node::AppStatus::kOk) {
      out.error = "app error: " + r.error;
      return out;
    }
    auto reply = backup_protocol::parse_reply(r.output);
    out.status = reply.status;
    if (body) *body = std::move(reply.body);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

PutResult BackupClient::put(const std::string& backup_id, ByteView secret, RandomSource& rng) {
  auto audited = auditor::audit(descriptor_, pins_, options_);
  if (!audited.report.pass) throw AuditRefused(std::move(audited.report));
  pins_ = std::move(audited.pins);

  const unsigned n = static_cast<unsigned>(descriptor_.n());
  const unsigned t = descriptor_.threshold;
  std::vector<Share> shares = split(secret, t, n, rng);

  PutResult out;
  out.report = std::move(audited.report);
  BackupRecord& rec = out.record;
  rec.backup_id = backup_id;
  rec.threshold = t;
  rec.secret_digest = sha256(secret);
  rng.fill(rec.token);

  std::set<uint8_t> used;
  for (size_t i = 0; i < n; ++i) {
    if (!used.insert(shares[i].x).second) throw BackupError("share index reused");
    rec.domains.push_back(descriptor_.domains[i].domain_id);
  }
  for (size_t i = 0; i < n; ++i) {
    const auto& spec = descriptor_.domains[i];
    Bytes req = backup_protocol::store_request(as_bytes(backup_id), rec.token, shares[i].encode());
    DomainOutcome o = call(spec, req, nullptr);
    if (o.error.empty() && o.status == Status::kOk) ++out.stored;
    out.outcomes[spec.domain_id] = std::move(o);
  }
  if (out.stored < t) {
    throw BackupError("only " + std::to_string(out.stored) + " of " + std::to_string(n) +
                      " domains stored a share; " + std::to_string(t) + " are needed");
  }
  return out;
}

Bytes BackupClient::recover(const BackupRecord& record) {
  std::vector<Share> fetched;
  for (size_t i = 0; i < record.domains.size(); ++i) {
    const auditor::DomainSpec* spec = descriptor_.find(record.domains[i]);
    if (!spec) continue;
    Bytes body;
    DomainOutcome o = call(*spec, backup_protocol::fetch_request(as_bytes(record.backup_id), record.token), &body);
    if (!o.error.empty() || o.status != Status::kOk) continue;
    try {
      Share s = Share::decode(body);
      // A domain only ever holds the share with its own index.
      if (s.x == i + 1 && s.t == record.threshold) fetched.push_back(std::move(s));
    } catch (const Error&) {
    }
  }
  const size_t t = record.threshold;
  if (fetched.size() < t) {
    throw InsufficientShares("fetched " + std::to_string(fetched.size()) + " usable shares, need " +
                             std::to_string(t));
  }

  // Try t-subsets in lexicographic order until one reproduces the digest,
  // which tolerates domains returning corrupted shares.
  std::vector<size_t> idx(t);
  for (size_t i = 0; i < t; ++i) idx[i] = i;
  while (true) {
    std::vector<Share> subset;
    for (size_t i : idx) subset.push_back(fetched[i]);
    try {
      Bytes secret = demoapp::recover(subset);
      if (sha256(secret) == record.secret_digest) return secret;
    } catch (const Error&) {
    }
    size_t k = t;
    while (k > 0 && idx[k - 1] == fetched.size() - t + k - 1) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (size_t j = k; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
  throw IntegrityError("no subset of " + std::to_string(fetched.size()) +
                       " fetched shares matches the recorded secret digest");
}

std::map<std::string, DomainOutcome> BackupClient::remove(const BackupRecord& record) {
  std::map<std::string, DomainOutcome> out;
  for (const std::string& id : record.domains) {
    const auditor::DomainSpec* spec = descriptor_.find(id);
    if (!spec) continue;
    out[id] = call(*spec, backup_protocol::delete_request(as_bytes(record.backup_id), record.token), nullptr);
  }
  return out;
}

}  // namespace dtrust::demoapp
