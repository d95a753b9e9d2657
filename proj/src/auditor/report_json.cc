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

#include "dtrust/auditor/report_json.h"

#include <json.hpp>
#include <sstream>

namespace dtrust::auditor {

namespace {

using nlohmann::json;

json proofs_json(const std::vector<MisbehaviorProof>& proofs) {
  json out = json::array();
  for (const auto& p : proofs) {
    out.push_back({{"kind", to_string(p.kind())},
                   {"domain_id", p.domain_id()},
                   {"encoded", to_hex(p.encode())}});
  }
  return out;
}

json domain_json(const DomainResult& r) {
  json d = {{"domain_id", r.domain_id},
            {"endpoint", r.endpoint},
            {"backend", std::string(attest::to_string(r.backend))},
            {"status", to_string(r.status)},
            {"reason", r.reason},
            {"log_consistent", r.log_consistent},
            {"findings", r.findings}};
  d["app_digest"] = r.doc ? json(r.doc->app_digest.hex()) : json(nullptr);
  d["framework_digest"] = r.doc ? json(r.doc->framework_digest.hex()) : json(nullptr);
  if (r.doc && !r.doc->log_head.empty()) {
    d["log_seq"] = r.doc->log_head.seq;
    d["log_head"] = r.doc->log_head.head.hex();
  } else {
    d["log_seq"] = nullptr;
    d["log_head"] = nullptr;
  }
  d["version"] = r.version ? json(*r.version) : json(nullptr);
  return d;
}

json report_value(const AuditReport& rep) {
  json kinds = json::object();
  for (const auto& [kind, count] : rep.backend_kinds) kinds[std::string(attest::to_string(kind))] = count;
  json domains = json::array();
  for (const auto& r : rep.domains) domains.push_back(domain_json(r));
  return {{"verdict", rep.pass ? "pass" : "fail"},
          {"threshold", rep.threshold},
          {"n", rep.domains.size()},
          {"valid_count", rep.valid_count},
          {"digest_agreement", rep.digest_agreement},
          {"agreed_app_digest", rep.agreed_app_digest ? json(rep.agreed_app_digest->hex()) : json(nullptr)},
          {"log_consistency", rep.log_consistency},
          {"backend_kinds", kinds},
          {"domains", domains},
          {"proofs", proofs_json(rep.proofs)}};
}

}  // namespace

std::string report_json(const AuditReport& report) { return report_value(report).dump(2); }

std::string update_check_json(const UpdateCheck& c) {
  json adoption = json::object();
  for (const auto& [id, a] : c.adoption) adoption[id] = to_string(a);
  json out = {{"result", to_string(c.kind)},
              {"new_digest", c.new_digest ? json(c.new_digest->hex()) : json(nullptr)},
              {"new_version", c.new_version ? json(*c.new_version) : json(nullptr)},
              {"adoption", adoption},
              {"inconsistent", c.inconsistent},
              {"proofs", proofs_json(c.proofs)},
              {"report", report_value(c.report)}};
  return out.dump(2);
}

std::string report_text(const AuditReport& rep) {
  std::ostringstream out;
  out << "verdict: " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.valid_count << " valid of "
      << rep.domains.size() << ", threshold " << rep.threshold << ")\n";
  out << "digest agreement: " << (rep.digest_agreement ? "yes" : "no");
  if (rep.agreed_app_digest) out << " (" << rep.agreed_app_digest->hex() << ")";
  out << "\nlog consistency: " << (rep.log_consistency ? "yes" : "no") << "\n";
  for (const auto& r : rep.domains) {
    out << "  " << r.domain_id << " [" << attest::to_string(r.backend) << "] " << to_string(r.status);
    if (!r.reason.empty()) out << ": " << r.reason;
    if (r.doc) {
      out << " app=" << r.doc->app_digest.hex().substr(0, 16)
          << " log=" << tlog::to_string(r.doc->log_head);
    }
    out << "\n";
    for (const auto& f : r.findings) out << "    - " << f << "\n";
  }
  for (const auto& p : rep.proofs) {
    out << "  proof: " << to_string(p.kind()) << " against " << p.domain_id() << "\n";
  }
  return out.str();
}

}  // namespace dtrust::auditor
