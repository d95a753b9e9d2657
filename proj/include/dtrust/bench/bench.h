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

// Latency comparison of one CPU-bound workload run natively, inside the
// sandbox engines, and behind a full node request path.

#include <functional>
#include <string>
#include <vector>

#include "dtrust/canon/bytes.h"

namespace dtrust::bench {

// A workload pairs a catalog app with a native implementation that must
// produce byte-identical output for every input.
struct Workload {
  std::string name;
  std::string app;
  std::function<Bytes(uint64_t iteration)> input;
  std::function<Bytes(ByteView input)> native;
};

// Shamir-style share evaluation over GF(2^8) (the gf_bench app): per round,
// a degree-2 polynomial per secret byte evaluated at x = 1..5.
Workload gf_share_workload(uint32_t rounds);

struct BenchOptions {
  size_t iterations = 1000;
  size_t warmup = 50;
  bool interpreter = true;
  bool node = true;
  // Gate on sandbox median / native median.
  double max_overhead = 5.0;
};

struct Row {
  std::string environment;
  size_t iterations = 0;
  double median_us = 0;
  double p90_us = 0;
  double overhead = 0;  // median relative to native
  bool outputs_match = false;
  std::string note;
};

struct BenchReport {
  std::string workload;
  std::vector<Row> rows;
  // The sandbox row the gate applies to (AOT when available).
  std::string gated_environment;
  double gated_overhead = 0;
  bool outputs_equal = false;
  bool pass = false;
  double max_overhead = 5.0;
};

BenchReport run_bench(const Workload& workload, const BenchOptions& options);

// The overhead measured for the original design's sandbox; printed for
// comparison, never gated on.
inline constexpr double kReferenceSandboxOverhead = 0.461;

std::string bench_table(const BenchReport& report);
std::string bench_json(const BenchReport& report);

}  // namespace dtrust::bench
