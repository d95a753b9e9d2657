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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "dtrust/canon/crypto.h"
#include "dtrust/sandbox/bytecode.h"

namespace dtrust::sandbox {

class SandboxError : public Error {
 public:
  enum class Kind { kLoad, kForbiddenImport, kAppFault, kTimeout, kMemoryExceeded, kHostCall };

  SandboxError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(SandboxError::Kind kind);

class LoadError : public SandboxError {
 public:
  explicit LoadError(const std::string& what) : SandboxError(Kind::kLoad, what) {}
};

class ForbiddenImport : public SandboxError {
 public:
  explicit ForbiddenImport(std::string symbol)
      : SandboxError(Kind::kForbiddenImport, "forbidden import: " + symbol),
        symbol_(std::move(symbol)) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

class AppFault : public SandboxError {
 public:
  explicit AppFault(const std::string& what) : SandboxError(Kind::kAppFault, what) {}
};

class Timeout : public SandboxError {
 public:
  explicit Timeout(const std::string& what) : SandboxError(Kind::kTimeout, what) {}
};

class MemoryExceeded : public SandboxError {
 public:
  explicit MemoryExceeded(const std::string& what) : SandboxError(Kind::kMemoryExceeded, what) {}
};

class HostCallError : public SandboxError {
 public:
  explicit HostCallError(const std::string& what) : SandboxError(Kind::kHostCall, what) {}
};

struct SandboxLimits {
  uint64_t max_memory_bytes = 64ull << 20;
  uint64_t max_millis_per_request = 5000;
  uint32_t max_call_depth = 1024;
  uint64_t max_key_bytes = 1024;
  uint64_t max_value_bytes = 1ull << 20;
  uint64_t max_response_bytes = 16ull << 20;

  // Throws Error unless the memory and time budgets are strictly positive.
  void validate() const;
};

// Storage behind the store_* host calls. Each operation is atomic.
class KeyValueStore {
 public:
  virtual ~KeyValueStore() = default;
  virtual std::optional<Bytes> get(ByteView key) const = 0;
  virtual void put(ByteView key, ByteView value) = 0;
  virtual bool erase(ByteView key) = 0;
};

// Application code as shipped: raw module bytes and their digest.
struct AppBundle {
  Bytes code;
  Digest digest;

  static AppBundle from_code(Bytes code);
};

enum class Engine { kInterpreter, kAot };

const char* to_string(Engine e);
Engine parse_engine(std::string_view name);

// Engine-specific executable form of a validated module. Immutable and
// shareable between instances.
class CompiledApp {
 public:
  virtual ~CompiledApp() = default;
  virtual const Module& module() const = 0;
  virtual Engine engine() const = 0;
};

struct LoadOptions {
  Engine engine = Engine::kInterpreter;
  // Refuse the bundle unless its recomputed digest equals this value.
  std::optional<Digest> expected_digest;
  // Directory for AOT compilation artifacts; empty picks a per-user temp dir.
  std::string aot_cache_dir;
};

// Validates the module against the import allow-list and the limits.
// Throws LoadError, ForbiddenImport.
std::shared_ptr<const CompiledApp> compile(const AppBundle& bundle, const SandboxLimits& limits,
                                           const LoadOptions& options = {});

// One executing copy of an app. Handles one request at a time; linear memory
// is reset to the module's initial image before every request, so nothing
// but the host-call store carries state between requests.
class SandboxInstance {
 public:
  SandboxInstance(std::shared_ptr<const CompiledApp> app, SandboxLimits limits,
                  KeyValueStore& store);
  ~SandboxInstance();
  SandboxInstance(const SandboxInstance&) = delete;
  SandboxInstance& operator=(const SandboxInstance&) = delete;

  // Throws AppFault, Timeout, MemoryExceeded, HostCallError. The instance
  // stays usable after any of these.
  Bytes handle(ByteView request);

  const CompiledApp& app() const { return *app_; }

  struct Impl;

 private:
  std::shared_ptr<const CompiledApp> app_;
  std::unique_ptr<Impl> impl_;
};

// compile() followed by a fresh instance.
std::unique_ptr<SandboxInstance> load(const AppBundle& bundle, const SandboxLimits& limits,
                                      KeyValueStore& store, const LoadOptions& options = {});

bool aot_available();

}  // namespace dtrust::sandbox
