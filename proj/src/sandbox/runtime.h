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

// Engine-independent pieces of request execution shared by the interpreter
// and the AOT tier.

#include <chrono>
#include <cstring>

#include "dtrust/sandbox/sandbox.h"

namespace dtrust::sandbox::internal {

using Clock = std::chrono::steady_clock;

// Number of metered events (back-edges and calls) between clock reads.
inline constexpr uint32_t kFuelSlice = 1u << 12;

struct ExecContext {
  ExecContext(const SandboxLimits& l, KeyValueStore& s) : limits(l), store(s) {}

  const SandboxLimits& limits;
  KeyValueStore& store;
  ByteView request;
  Bytes response;
  Bytes memory;
  std::vector<uint64_t> registers;  // interpreter register stack, reused across requests
  uint64_t memory_cap = 0;
  Clock::time_point deadline;

  void check_deadline() const {
    if (Clock::now() >= deadline) {
      throw Timeout("request exceeded " + std::to_string(limits.max_millis_per_request) + " ms");
    }
  }

  // Throws AppFault unless [addr, addr + len) lies inside linear memory.
  uint8_t* span(uint64_t addr, uint64_t len) {
    if (addr > memory.size() || len > memory.size() - addr) {
      throw AppFault("memory access out of bounds at " + std::to_string(addr));
    }
    return memory.data() + addr;
  }

  uint64_t grow(uint64_t delta);
  void copy(uint64_t dst, uint64_t src, uint64_t len);
  void fill(uint64_t dst, uint64_t value, uint64_t len);
};

// Performs one allow-listed host call with arguments args[0..arity).
uint64_t host_call(ExecContext& ctx, HostFn fn, const uint64_t* args);

// Validated module plus its initial memory image.
class CompiledBase : public CompiledApp {
 public:
  CompiledBase(Module m, uint64_t memory_cap);
  const Module& module() const override { return module_; }
  const Bytes& image() const { return image_; }
  uint64_t memory_cap() const { return memory_cap_; }

  // Runs the exported entry point; ctx.memory has already been reset.
  virtual uint64_t run(ExecContext& ctx) const = 0;

 private:
  Module module_;
  Bytes image_;
  uint64_t memory_cap_;
};

std::shared_ptr<const CompiledBase> compile_interpreter(Module m, const SandboxLimits& limits);
std::shared_ptr<const CompiledBase> compile_aot(Module m, const SandboxLimits& limits,
                                                const Digest& digest, const std::string& cache_dir);

}  // namespace dtrust::sandbox::internal
