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

// Stable JSON rendering of audit results. Digests, keys and proofs are hex;
// proofs carry their canonical binary encoding so they can be re-verified.
//
// Report shape:
//   {
//     "verdict": "pass" | "fail",
//     "threshold": t, "n": n, "valid_count": k,
//     "digest_agreement": bool, "agreed_app_digest": hex | null,
//     "log_consistency": bool,
//     "backend_kinds": {"sim-a": 1, ...},
//     "domains": [{"domain_id", "endpoint", "backend", "status", "reason",
//                  "app_digest", "framework_digest", "log_seq", "log_head",
//                  "version", "log_consistent", "findings": [...]}],
//     "proofs": [{"kind", "domain_id", "encoded"}]
//   }
// Update checks wrap a report as {"result", "new_digest", "new_version",
// "adoption": {domain_id: "adopted" | "not-adopted" | "unknown"},
// "inconsistent": [...], "proofs": [...], "report": {...}}.

#include <string>

#include "dtrust/auditor/auditor.h"

namespace dtrust::auditor {

std::string report_json(const AuditReport& report);
std::string update_check_json(const UpdateCheck& check);

// Human-readable multi-line summary.
std::string report_text(const AuditReport& report);

}  // namespace dtrust::auditor
