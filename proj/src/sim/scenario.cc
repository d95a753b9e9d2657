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

#include "dtrust/sim/scenario.h"

#include <algorithm>

namespace dtrust::sim {

ScenarioResult run_scenario(std::mt19937_64& rng) {
  using attest::BackendKind;
  ScenarioResult out;
  const size_t n = 2 + rng() % 4;
  for (size_t i = 0; i < n; ++i) {
    // Roughly one deployment in four includes an unattested developer domain.
    if (i == 0 && rng() % 4 == 0) {
      out.kinds.push_back(BackendKind::kNull);
    } else {
      out.kinds.push_back(static_cast<BackendKind>(1 + rng() % 3));
    }
  }
  const size_t attested = static_cast<size_t>(
      std::count_if(out.kinds.begin(), out.kinds.end(), [](auto k) { return k != BackendKind::kNull; }));
  out.threshold = static_cast<uint32_t>(1 + rng() % attested);

  Deployment dep({out.kinds, out.threshold, sandbox::Engine::kInterpreter});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  out.descriptor = dep.descriptor();

  auto first = auditor::audit(out.descriptor, {}, dep.audit_options());
  out.baseline_pass = first.report.pass;

  // A third of the runs stay honest; otherwise corrupt 1..n-1 domains.
  out.strategies.assign(n, Strategy::kHonest);
  if (rng() % 3 != 0) {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const size_t k = 1 + rng() % (n - 1);
    for (size_t j = 0; j < k; ++j) {
      auto s = static_cast<Strategy>(1 + rng() % 4);
      out.strategies[order[j]] = s;
      dep.corrupt(order[j], s, rng);
    }
  }

  size_t valid = 0;
  bool deviant = false;
  for (size_t i = 0; i < n; ++i) {
    if (out.kinds[i] == BackendKind::kNull) continue;
    Strategy s = out.strategies[i];
    if (s != Strategy::kUnreachable) ++valid;
    if (s != Strategy::kHonest && s != Strategy::kUnreachable) deviant = true;
    if (s == Strategy::kForkedLog) ++out.attested_forks;
  }
  out.fully_honest = std::all_of(out.strategies.begin(), out.strategies.end(),
                                 [](Strategy s) { return s == Strategy::kHonest; });
  out.expected_pass = valid >= out.threshold && !deviant;

  out.report = auditor::audit(out.descriptor, first.pins, dep.audit_options()).report;
  return out;
}

}  // namespace dtrust::sim
