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

#include <random>
#include <vector>

#include "dtrust/sim/deployment.h"

namespace dtrust::sim {

// One randomized adversarial deployment: n in [2, 5] domains with at least
// t attested, counter v1 then v2 installed everywhere, a first audit by an
// honest client, then up to n-1 domains corrupted and a second audit
// against the pins from the first.
struct ScenarioResult {
  std::vector<attest::BackendKind> kinds;
  std::vector<Strategy> strategies;
  uint32_t threshold = 0;

  // Ground truth, computed from the strategies alone.
  bool expected_pass = false;
  bool fully_honest = false;
  size_t attested_forks = 0;

  bool baseline_pass = false;  // first audit, before corruption
  auditor::AuditReport report;
  auditor::DeploymentDescriptor descriptor;
};

ScenarioResult run_scenario(std::mt19937_64& rng);

}  // namespace dtrust::sim
