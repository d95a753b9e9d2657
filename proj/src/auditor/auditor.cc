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

#include "dtrust/auditor/auditor.h"

#include <future>

namespace dtrust::auditor {

namespace {

using attest::AttestationDocument;
using tlog::LogHead;
using tlog::SignedHead;

bool same_proof(const MisbehaviorProof& a, const MisbehaviorProof& b) {
  return a.encode() == b.encode();
}

void add_proof(std::vector<MisbehaviorProof>& proofs, MisbehaviorProof p) {
  for (const auto& q : proofs) {
    if (same_proof(q, p)) return;
  }
  proofs.push_back(std::move(p));
}

// Two validly signed heads from one domain at the same seq that differ.
std::optional<MisbehaviorProof> equivocation(const attest::BackendIdentity& id, const SignedHead& a,
                                             const SignedHead& b) {
  if (!id.attested() || a.head.seq != b.head.seq || a.head == b.head) return std::nullopt;
  try {
    return MisbehaviorProof{id, tlog::make_equivocation_proof(a, b, id.attestation_pk)};
  } catch (const tlog::NotEquivocation&) {
    return std::nullopt;
  }
}

struct Query {
  DomainResult result;
  std::vector<MisbehaviorProof> proofs;
};

class DomainAuditor {
 public:
  DomainAuditor(const DeploymentDescriptor& d, const DomainSpec& spec, const Pin* pin,
                const Connector& connect)
      : d_(d), spec_(spec), pin_(pin), connect_(connect) {
    q_.result.domain_id = spec.domain_id;
    q_.result.endpoint = spec.endpoint;
    q_.result.backend = spec.identity.kind;
  }

  Query run() {
    DomainResult& r = q_.result;
    attest::Nonce nonce = attest::random_nonce();
    LogHead base = pin_ ? pin_->head.head : LogHead::empty_log();
    node::StatusResponse s;
    try {
      auto client = connect_(spec_);
      s = client->status(nonce, base.seq);
    } catch (const node::Unreachable& e) {
      r.status = DomainStatus::kUnreachable;
      r.reason = e.what();
      return std::move(q_);
    } catch (const std::exception& e) {
      r.status = DomainStatus::kInvalid;
      r.reason = e.what();
      return std::move(q_);
    }
    r.doc = s.doc;
    r.head = s.head;

    if (!check_attestation(s, nonce)) return std::move(q_);
    check_history(s, base);
    check_release();
    return std::move(q_);
  }

 private:
  bool attested() const { return spec_.identity.attested(); }

  bool check_attestation(const node::StatusResponse& s, const attest::Nonce& nonce) {
    DomainResult& r = q_.result;
    attest::Verdict v = attest::verify_document(s.doc, spec_.identity, nonce, d_.trust_roots);
    if (v.status == attest::Verdict::Status::kInvalid) {
      r.status = DomainStatus::kInvalid;
      r.reason = v.reason;
      return false;
    }
    if (s.doc.domain_id != spec_.identity.domain_id || s.doc.kind != spec_.identity.kind) {
      r.status = DomainStatus::kInvalid;
      r.reason = "document names another domain or backend";
      return false;
    }
    if (s.head.domain_id != spec_.identity.domain_id) {
      r.status = DomainStatus::kInvalid;
      r.reason = "signed head names another domain";
      return false;
    }
    if (attested() && !tlog::verify_signed_head(s.head, spec_.identity.attestation_pk)) {
      r.status = DomainStatus::kInvalid;
      r.reason = "signed head does not verify";
      return false;
    }
    r.status = attested() ? DomainStatus::kValid : DomainStatus::kUnattested;

    r.framework_matches = s.doc.framework_digest == d_.framework_digest;
    if (!r.framework_matches) {
      r.findings.push_back("framework digest " + s.doc.framework_digest.hex() + " is not the expected " +
                           d_.framework_digest.hex());
    }
    return true;
  }

  void inconsistent(std::string why) {
    q_.result.log_consistent = false;
    q_.result.findings.push_back(std::move(why));
  }

  void check_history(const node::StatusResponse& s, const LogHead& base) {
    DomainResult& r = q_.result;
    const LogHead& current = s.doc.log_head;

    // Conflicting signed statements about one position are proof material
    // whatever else the domain says.
    if (pin_ && attested()) {
      for (const SignedHead* other : {&s.head, s.anchor ? &*s.anchor : nullptr}) {
        if (!other || !tlog::verify_signed_head(*other, spec_.identity.attestation_pk)) continue;
        if (auto p = equivocation(spec_.identity, pin_->head, *other)) add_proof(q_.proofs, std::move(*p));
      }
    }

    r.log_consistent = true;
    if (s.head.head != current) {
      inconsistent("signed head " + tlog::to_string(s.head.head) + " differs from attested head " +
                   tlog::to_string(current));
      return;
    }
    if (!s.delta) {
      inconsistent("domain reports no history from " + tlog::to_string(base) + " (log at " +
                   tlog::to_string(current) + ")");
      return;
    }
    const auto& delta = *s.delta;
    if (auto c = tlog::is_prefix(base, delta, current); !c) {
      inconsistent(pin_ ? "history does not extend the pinned head: " + c.diagnostic
                        : "history does not verify: " + c.diagnostic);
      return;
    }
    if (pin_ && !delta.empty() && delta.front().version <= pin_->version) {
      inconsistent("version does not increase past the pinned version " + std::to_string(pin_->version));
      return;
    }
    for (const tlog::LogEntry& e : delta) {
      if (!node::verify_release(d_.developer_pk, e.code_digest, e.version, e.update_sig)) {
        inconsistent("log entry " + std::to_string(e.seq) + " is not signed by the developer");
        return;
      }
    }

    Digest logged = Digest::zero();
    uint64_t version = 0;
    if (!delta.empty()) {
      logged = delta.back().code_digest;
      version = delta.back().version;
    } else if (pin_) {
      logged = pin_->code_digest;
      version = pin_->version;
    }
    if (s.doc.app_digest != logged) {
      inconsistent("attested app digest " + s.doc.app_digest.hex() + " is not the logged digest " +
                   logged.hex());
      return;
    }
    if (!current.empty()) r.version = version;
    r.new_pin = Pin{s.head, logged, version};
  }

  void check_release() {
    DomainResult& r = q_.result;
    if (!d_.release || r.status != DomainStatus::kValid) return;
    if (r.doc->app_digest == d_.release->app_digest) return;
    r.findings.push_back("app digest " + r.doc->app_digest.hex() + " is not the published release " +
                         d_.release->app_digest.hex());
    add_proof(q_.proofs, MisbehaviorProof{spec_.identity, DigestMismatchProof{*r.doc, *d_.release}});
  }

  const DeploymentDescriptor& d_;
  const DomainSpec& spec_;
  const Pin* pin_;
  const Connector& connect_;
  Query q_;
};

struct Collected {
  AuditReport report;
  PinStore pins;
};

Collected collect(const DeploymentDescriptor& d, const PinStore& pins, const AuditOptions& opt) {
  std::vector<Query> queries;
  if (opt.concurrent && d.domains.size() > 1) {
    std::vector<std::future<Query>> futures;
    for (const DomainSpec& spec : d.domains) {
      futures.push_back(std::async(std::launch::async, [&, pin = pins.find(spec.domain_id)] {
        return DomainAuditor(d, spec, pin, opt.connect).run();
      }));
    }
    for (auto& f : futures) queries.push_back(f.get());
  } else {
    for (const DomainSpec& spec : d.domains) {
      queries.push_back(DomainAuditor(d, spec, pins.find(spec.domain_id), opt.connect).run());
    }
  }

  Collected out;
  AuditReport& rep = out.report;
  out.pins = pins;
  rep.threshold = d.threshold;

  std::optional<Digest> agreed;
  bool agree = true;
  bool consistent = true;
  for (Query& q : queries) {
    DomainResult& r = q.result;
    ++rep.backend_kinds[r.backend];
    for (auto& p : q.proofs) add_proof(rep.proofs, std::move(p));
    if (r.status == DomainStatus::kValid) {
      ++rep.valid_count;
      if (!r.framework_matches) agree = false;
      if (!agreed) agreed = r.doc->app_digest;
      if (*agreed != r.doc->app_digest) agree = false;
      if (!r.log_consistent) consistent = false;
    }
    bool usable = r.status == DomainStatus::kValid || r.status == DomainStatus::kUnattested;
    if (usable && r.log_consistent && r.new_pin) out.pins.advance(r.domain_id, *r.new_pin);
    rep.domains.push_back(std::move(r));
  }
  if (agreed && d.release && *agreed != d.release->app_digest) agree = false;
  rep.digest_agreement = rep.valid_count > 0 && agree;
  if (rep.digest_agreement) rep.agreed_app_digest = agreed;
  rep.log_consistency = consistent;
  rep.pass = rep.valid_count >= d.threshold && rep.digest_agreement && rep.log_consistency;
  return out;
}

}  // namespace

const char* to_string(DomainStatus s) {
  switch (s) {
    case DomainStatus::kValid: return "valid";
    case DomainStatus::kUnattested: return "unattested";
    case DomainStatus::kInvalid: return "invalid";
    case DomainStatus::kUnreachable: return "unreachable";
  }
  return "unknown";
}

const char* to_string(Adoption a) {
  switch (a) {
    case Adoption::kAdopted: return "adopted";
    case Adoption::kNotAdopted: return "not-adopted";
    case Adoption::kUnknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(UpdateCheck::Kind k) {
  switch (k) {
    case UpdateCheck::Kind::kNoChange: return "no-change";
    case UpdateCheck::Kind::kUpdateObserved: return "update-observed";
    case UpdateCheck::Kind::kInconsistent: return "inconsistent";
  }
  return "unknown";
}

Connector tcp_connector(std::chrono::milliseconds timeout) {
  return [timeout](const DomainSpec& spec) -> std::unique_ptr<node::DomainClient> {
    return std::make_unique<node::TcpClient>(spec.endpoint, timeout);
  };
}

AuditOutcome audit(const DeploymentDescriptor& descriptor, const PinStore& pins,
                   const AuditOptions& options) {
  Collected c = collect(descriptor, pins, options);
  return {std::move(c.report), std::move(c.pins)};
}

UpdateCheck check_update(const DeploymentDescriptor& descriptor, const PinStore& pins,
                         const AuditOptions& options) {
  Collected c = collect(descriptor, pins, options);
  UpdateCheck out;

  // The newest digest any domain moved to since its pin.
  for (const DomainResult& r : c.report.domains) {
    const Pin* pin = pins.find(r.domain_id);
    if (!pin || !r.new_pin) continue;
    bool usable = r.status == DomainStatus::kValid || r.status == DomainStatus::kUnattested;
    if (!usable || !r.log_consistent) continue;
    if (r.new_pin->head.head.size() <= pin->head.head.size()) continue;
    if (r.new_pin->code_digest == pin->code_digest) continue;
    if (!out.new_version || r.new_pin->version > *out.new_version) {
      out.new_version = r.new_pin->version;
      out.new_digest = r.new_pin->code_digest;
    }
  }

  for (const DomainResult& r : c.report.domains) {
    const Pin* pin = pins.find(r.domain_id);
    bool responded = r.status == DomainStatus::kValid || r.status == DomainStatus::kUnattested;
    if (pin && responded && !r.log_consistent) out.inconsistent.push_back(r.domain_id);
    Adoption a = Adoption::kUnknown;
    if (responded && r.log_consistent && r.new_pin && out.new_digest) {
      a = r.new_pin->code_digest == *out.new_digest ? Adoption::kAdopted : Adoption::kNotAdopted;
    }
    out.adoption[r.domain_id] = a;
  }

  if (!out.inconsistent.empty()) {
    out.kind = UpdateCheck::Kind::kInconsistent;
  } else if (out.new_digest) {
    out.kind = UpdateCheck::Kind::kUpdateObserved;
  }
  out.proofs = c.report.proofs;
  out.report = std::move(c.report);
  out.pins = std::move(c.pins);
  return out;
}

std::vector<MisbehaviorProof> cross_check_pins(const DeploymentDescriptor& descriptor,
                                               const PinStore& a, const PinStore& b) {
  std::vector<MisbehaviorProof> proofs;
  for (const auto& [id, pa] : a.pins()) {
    const Pin* pb = b.find(id);
    const DomainSpec* spec = descriptor.find(id);
    if (!pb || !spec) continue;
    if (auto p = equivocation(spec->identity, pa.head, pb->head)) add_proof(proofs, std::move(*p));
  }
  return proofs;
}

}  // namespace dtrust::auditor
