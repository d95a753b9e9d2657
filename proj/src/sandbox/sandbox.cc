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

#include "dtrust/sandbox/sandbox.h"

#include <algorithm>

#include "runtime.h"

namespace dtrust::sandbox {

using internal::CompiledBase;
using internal::ExecContext;

const char* to_string(SandboxError::Kind kind) {
  switch (kind) {
    case SandboxError::Kind::kLoad: return "LoadError";
    case SandboxError::Kind::kForbiddenImport: return "ForbiddenImport";
    case SandboxError::Kind::kAppFault: return "AppFault";
    case SandboxError::Kind::kTimeout: return "Timeout";
    case SandboxError::Kind::kMemoryExceeded: return "MemoryExceeded";
    case SandboxError::Kind::kHostCall: return "HostCallError";
  }
  return "SandboxError";
}

void SandboxLimits::validate() const {
  if (max_memory_bytes == 0) throw Error("sandbox memory limit must be positive");
  if (max_millis_per_request == 0) throw Error("sandbox time limit must be positive");
  if (max_call_depth == 0) throw Error("sandbox call depth must be positive");
}

AppBundle AppBundle::from_code(Bytes code) {
  AppBundle b;
  b.digest = sha256(code);
  b.code = std::move(code);
  return b;
}

const char* to_string(Engine e) { return e == Engine::kAot ? "aot" : "interpreter"; }

Engine parse_engine(std::string_view name) {
  if (name == "interpreter" || name == "interp") return Engine::kInterpreter;
  if (name == "aot") return Engine::kAot;
  throw Error("unknown sandbox engine: " + std::string(name));
}

namespace internal {

uint64_t ExecContext::grow(uint64_t delta) {
  uint64_t old = memory.size();
  if (delta > memory_cap - old) {
    throw MemoryExceeded("memory growth to " + std::to_string(old) + "+" + std::to_string(delta) +
                         " bytes exceeds limit of " + std::to_string(memory_cap));
  }
  memory.resize(old + delta, 0);
  return old;
}

void ExecContext::copy(uint64_t dst, uint64_t src, uint64_t len) {
  uint8_t* d = span(dst, len);
  const uint8_t* s = span(src, len);
  std::memmove(d, s, len);
}

void ExecContext::fill(uint64_t dst, uint64_t value, uint64_t len) {
  std::memset(span(dst, len), static_cast<int>(value & 0xff), len);
}

uint64_t host_call(ExecContext& ctx, HostFn fn, const uint64_t* args) {
  auto key_at = [&](uint64_t ptr, uint64_t len) {
    if (len > ctx.limits.max_key_bytes) {
      throw HostCallError("key of " + std::to_string(len) + " bytes exceeds cap of " +
                          std::to_string(ctx.limits.max_key_bytes));
    }
    return ByteView(ctx.span(ptr, len), len);
  };
  switch (fn) {
    case HostFn::kRequestLen:
      return ctx.request.size();
    case HostFn::kRequestRead: {
      uint64_t dst = args[0], off = args[1], len = args[2];
      if (off >= ctx.request.size()) return 0;
      uint64_t n = std::min<uint64_t>(len, ctx.request.size() - off);
      if (n > 0) std::memcpy(ctx.span(dst, n), ctx.request.data() + off, n);
      return n;
    }
    case HostFn::kResponseWrite: {
      uint64_t src = args[0], len = args[1];
      if (len > ctx.limits.max_response_bytes - ctx.response.size()) {
        throw HostCallError("response exceeds cap of " +
                            std::to_string(ctx.limits.max_response_bytes) + " bytes");
      }
      const uint8_t* p = ctx.span(src, len);
      ctx.response.insert(ctx.response.end(), p, p + len);
      return 0;
    }
    case HostFn::kStoreGet: {
      ByteView key = key_at(args[0], args[1]);
      uint64_t dst = args[2], cap = args[3];
      ctx.span(dst, cap);
      auto value = ctx.store.get(key);
      if (!value) return kAbsent;
      uint64_t n = std::min<uint64_t>(cap, value->size());
      if (n > 0) std::memcpy(ctx.span(dst, n), value->data(), n);
      return value->size();
    }
    case HostFn::kStorePut: {
      ByteView key = key_at(args[0], args[1]);
      uint64_t len = args[3];
      if (len > ctx.limits.max_value_bytes) {
        throw HostCallError("value of " + std::to_string(len) + " bytes exceeds cap of " +
                            std::to_string(ctx.limits.max_value_bytes));
      }
      ctx.store.put(key, ByteView(ctx.span(args[2], len), len));
      return 0;
    }
    case HostFn::kStoreDelete:
      return ctx.store.erase(key_at(args[0], args[1])) ? 1 : 0;
  }
  throw AppFault("unknown host call");
}

CompiledBase::CompiledBase(Module m, uint64_t memory_cap)
    : module_(std::move(m)), memory_cap_(memory_cap) {
  image_.assign(module_.initial_memory, 0);
  for (const DataSegment& seg : module_.data) {
    std::copy(seg.bytes.begin(), seg.bytes.end(), image_.begin() + seg.offset);
  }
}

}  // namespace internal

namespace {

uint64_t memory_cap_for(const Module& m, const SandboxLimits& limits) {
  uint64_t cap = limits.max_memory_bytes;
  if (m.max_memory != 0) cap = std::min<uint64_t>(cap, m.max_memory);
  if (m.initial_memory > limits.max_memory_bytes) {
    throw MemoryExceeded("initial memory of " + std::to_string(m.initial_memory) +
                         " bytes exceeds limit of " + std::to_string(limits.max_memory_bytes));
  }
  return cap;
}

}  // namespace

std::shared_ptr<const CompiledApp> compile(const AppBundle& bundle, const SandboxLimits& limits,
                                           const LoadOptions& options) {
  limits.validate();
  Digest actual = sha256(bundle.code);
  if (actual != bundle.digest) throw LoadError("bundle digest does not match its code");
  if (options.expected_digest && *options.expected_digest != actual) {
    throw LoadError("bundle digest " + actual.hex() + " differs from expected " +
                    options.expected_digest->hex());
  }
  Module m = parse_module(bundle.code);
  memory_cap_for(m, limits);
  if (options.engine == Engine::kAot) {
    return internal::compile_aot(std::move(m), limits, actual, options.aot_cache_dir);
  }
  return internal::compile_interpreter(std::move(m), limits);
}

struct SandboxInstance::Impl {
  Impl(const SandboxLimits& l, KeyValueStore& s) : limits(l), ctx(limits, s) {}
  SandboxLimits limits;
  ExecContext ctx;
};

SandboxInstance::SandboxInstance(std::shared_ptr<const CompiledApp> app, SandboxLimits limits,
                                 KeyValueStore& store)
    : app_(std::move(app)) {
  limits.validate();
  if (!dynamic_cast<const CompiledBase*>(app_.get())) throw LoadError("foreign compiled app");
  impl_ = std::make_unique<Impl>(limits, store);
  impl_->ctx.memory_cap = memory_cap_for(app_->module(), impl_->limits);
}

SandboxInstance::~SandboxInstance() = default;

Bytes SandboxInstance::handle(ByteView request) {
  const auto& app = static_cast<const CompiledBase&>(*app_);
  ExecContext& ctx = impl_->ctx;
  ctx.request = request;
  ctx.response.clear();
  ctx.memory.assign(app.image().begin(), app.image().end());
  ctx.deadline = internal::Clock::now() +
                 std::chrono::milliseconds(impl_->limits.max_millis_per_request);
  app.run(ctx);
  ctx.request = {};
  return std::move(ctx.response);
}

std::unique_ptr<SandboxInstance> load(const AppBundle& bundle, const SandboxLimits& limits,
                                      KeyValueStore& store, const LoadOptions& options) {
  return std::make_unique<SandboxInstance>(compile(bundle, limits, options), limits, store);
}

}  // namespace dtrust::sandbox
