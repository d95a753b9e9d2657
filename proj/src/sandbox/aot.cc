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

// Ahead-of-time engine: translates a validated module to C, compiles it with
// the system C compiler into a shared object, and runs it in-process.
//
// The generated code keeps every check the interpreter performs: memory
// accesses are bounds-checked against the live memory size, division traps,
// call depth is counted, and loop back-edges and calls are metered against
// the request deadline. Traps unwind with longjmp to the generated entry
// trampoline; host calls report failure through the environment so no C++
// exception ever crosses generated frames.

#include <dlfcn.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "runtime.h"

namespace dtrust::sandbox {

namespace internal {

namespace {

// Must match the struct emitted in kPrelude field for field.
struct AotEnv {
  uint8_t* mem;
  uint64_t mem_size;
  uint32_t depth;
  uint32_t max_depth;
  uint32_t trap;
  uint32_t pad;
  void* host;
  uint64_t (*host_call)(AotEnv*, uint32_t, const uint64_t*);
  int (*tick)(AotEnv*);
  uint64_t (*grow)(AotEnv*, uint64_t);
  void (*copy)(AotEnv*, uint64_t, uint64_t, uint64_t);
  void (*fill)(AotEnv*, uint64_t, uint64_t, uint64_t);
};

enum TrapCode : uint32_t {
  kTrapNone = 0,
  kTrapBounds = 1,
  kTrapDivZero = 2,
  kTrapOverflow = 3,
  kTrapUnreachable = 4,
  kTrapDepth = 5,
  kTrapHost = 6,
};

// Bump when the generated code changes shape; part of the cache key.
constexpr int kCodegenVersion = 1;

constexpr const char* kPrelude = R"(#include <setjmp.h>
#include <stdint.h>
#include <string.h>

typedef struct dt_env {
  uint8_t* mem;
  uint64_t mem_size;
  uint32_t depth;
  uint32_t max_depth;
  uint32_t trap;
  uint32_t pad;
  void* host;
  uint64_t (*host_call)(struct dt_env*, uint32_t, const uint64_t*);
  int (*tick)(struct dt_env*);
  uint64_t (*grow)(struct dt_env*, uint64_t);
  void (*copy)(struct dt_env*, uint64_t, uint64_t, uint64_t);
  void (*fill)(struct dt_env*, uint64_t, uint64_t, uint64_t);
} dt_env;

static __thread jmp_buf* dt_tls_jb;

__attribute__((noreturn, noinline, cold)) static void dt_trap(dt_env* e, uint32_t code) {
  if (code) e->trap = code;
  longjmp(*dt_tls_jb, 1);
}

#define DT_LIKELY(x) __builtin_expect(!!(x), 1)
#define DT_CHECK(addr, n) \
  if (!DT_LIKELY((addr) <= msz && msz - (addr) >= (n))) dt_trap(env, 1)
#define DT_REFRESH() do { mem = env->mem; msz = env->mem_size; } while (0)
#define DT_METER() \
  if (!DT_LIKELY(--fuel)) { fuel = 4096; if (env->tick(env)) dt_trap(env, 0); }

static inline uint64_t dt_ld8(const uint8_t* p) { return *p; }
static inline uint64_t dt_ld16(const uint8_t* p) { uint16_t v; memcpy(&v, p, 2); return v; }
static inline uint64_t dt_ld32(const uint8_t* p) { uint32_t v; memcpy(&v, p, 4); return v; }
static inline uint64_t dt_ld64(const uint8_t* p) { uint64_t v; memcpy(&v, p, 8); return v; }
static inline void dt_st8(uint8_t* p, uint64_t v) { *p = (uint8_t)v; }
static inline void dt_st16(uint8_t* p, uint64_t v) { uint16_t t = (uint16_t)v; memcpy(p, &t, 2); }
static inline void dt_st32(uint8_t* p, uint64_t v) { uint32_t t = (uint32_t)v; memcpy(p, &t, 4); }
static inline void dt_st64(uint8_t* p, uint64_t v) { memcpy(p, &v, 8); }
)";

std::string reg(unsigned r) { return "r" + std::to_string(r); }

std::string imm(int64_t v) {
  // Spelled as an unsigned literal so INT64_MIN needs no special casing.
  return "UINT64_C(" + std::to_string(static_cast<uint64_t>(v)) + ")";
}

void emit_signature(std::ostringstream& out, size_t index, const Function& fn) {
  out << "static uint64_t f" << index << "(dt_env* env";
  for (unsigned p = 0; p < fn.n_params; ++p) out << ", uint64_t a" << p;
  out << ")";
}

void emit_function(std::ostringstream& out, const Module& m, size_t index) {
  const Function& fn = m.functions[index];
  std::set<uint32_t> targets;
  for (const Insn& in : fn.code) {
    Shape s = op_info(static_cast<uint8_t>(in.op))->shape;
    if (s == Shape::kT || s == Shape::kRT || s == Shape::kRRT) targets.insert(in.target);
  }

  emit_signature(out, index, fn);
  out << " {\n";
  out << "  uint8_t* mem = env->mem; uint64_t msz = env->mem_size; uint32_t fuel = 4096;\n";
  out << "  (void)mem; (void)msz; (void)fuel;\n";
  for (unsigned r = 0; r < fn.n_regs; ++r) {
    out << "  uint64_t " << reg(r) << " = " << (r < fn.n_params ? "a" + std::to_string(r) : "0")
        << ";\n";
  }
  out << "  if (++env->depth > env->max_depth) dt_trap(env, 5);\n";

  for (uint32_t pc = 0; pc < fn.code.size(); ++pc) {
    const Insn& in = fn.code[pc];
    if (targets.count(pc)) out << "L" << pc << ":;\n";
    const std::string a = reg(in.a), b = reg(in.b), c = reg(in.c);
    auto bin = [&](const char* expr_op) { out << "  " << a << " = " << b << " " << expr_op << " " << c << ";\n"; };
    auto bini = [&](const char* expr_op) {
      out << "  " << a << " = " << b << " " << expr_op << " " << imm(in.imm) << ";\n";
    };
    auto cmp = [&](const char* expr_op, bool is_signed) {
      if (is_signed) {
        out << "  " << a << " = (int64_t)" << b << " " << expr_op << " (int64_t)" << c << ";\n";
      } else {
        out << "  " << a << " = " << b << " " << expr_op << " " << c << ";\n";
      }
    };
    auto jump = [&]() {
      if (in.target <= pc) out << "DT_METER() ";
      out << "goto L" << in.target << ";";
    };
    auto branch = [&](const std::string& cond) {
      out << "  if (" << cond << ") { ";
      jump();
      out << " }\n";
    };
    auto load = [&](int n) {
      out << "  { uint64_t ad = " << b << " + " << imm(in.imm) << "; DT_CHECK(ad, " << n << "); " << a
          << " = dt_ld" << n * 8 << "(mem + ad); }\n";
    };
    auto store = [&](int n) {
      out << "  { uint64_t ad = " << a << " + " << imm(in.imm) << "; DT_CHECK(ad, " << n << "); dt_st"
          << n * 8 << "(mem + ad, " << b << "); }\n";
    };
    switch (in.op) {
      case Op::Nop: break;
      case Op::Unreachable: out << "  dt_trap(env, 4);\n"; break;
      case Op::Const: out << "  " << a << " = " << imm(in.imm) << ";\n"; break;
      case Op::Mov: out << "  " << a << " = " << b << ";\n"; break;
      case Op::Add: bin("+"); break;
      case Op::Sub: bin("-"); break;
      case Op::Mul: bin("*"); break;
      case Op::DivU:
        out << "  if (!" << c << ") dt_trap(env, 2);\n";
        bin("/");
        break;
      case Op::RemU:
        out << "  if (!" << c << ") dt_trap(env, 2);\n";
        bin("%");
        break;
      case Op::DivS:
        out << "  if (!" << c << ") dt_trap(env, 2);\n";
        out << "  if (" << b << " == UINT64_C(0x8000000000000000) && " << c << " == ~UINT64_C(0)) dt_trap(env, 3);\n";
        out << "  " << a << " = (uint64_t)((int64_t)" << b << " / (int64_t)" << c << ");\n";
        break;
      case Op::RemS:
        out << "  if (!" << c << ") dt_trap(env, 2);\n";
        out << "  " << a << " = " << c << " == ~UINT64_C(0) ? 0 : (uint64_t)((int64_t)" << b
            << " % (int64_t)" << c << ");\n";
        break;
      case Op::And: bin("&"); break;
      case Op::Or: bin("|"); break;
      case Op::Xor: bin("^"); break;
      case Op::Shl: out << "  " << a << " = " << b << " << (" << c << " & 63);\n"; break;
      case Op::ShrU: out << "  " << a << " = " << b << " >> (" << c << " & 63);\n"; break;
      case Op::ShrS:
        out << "  " << a << " = (uint64_t)((int64_t)" << b << " >> (" << c << " & 63));\n";
        break;
      case Op::MulHU:
        out << "  " << a << " = (uint64_t)(((unsigned __int128)" << b << " * " << c << ") >> 64);\n";
        break;
      case Op::Eq: cmp("==", false); break;
      case Op::Ne: cmp("!=", false); break;
      case Op::LtU: cmp("<", false); break;
      case Op::LtS: cmp("<", true); break;
      case Op::LeU: cmp("<=", false); break;
      case Op::LeS: cmp("<=", true); break;
      case Op::Eqz: out << "  " << a << " = " << b << " == 0;\n"; break;
      case Op::AddI: bini("+"); break;
      case Op::MulI: bini("*"); break;
      case Op::AndI: bini("&"); break;
      case Op::OrI: bini("|"); break;
      case Op::XorI: bini("^"); break;
      case Op::ShlI: out << "  " << a << " = " << b << " << " << (in.imm & 63) << ";\n"; break;
      case Op::ShrUI: out << "  " << a << " = " << b << " >> " << (in.imm & 63) << ";\n"; break;
      case Op::ShrSI:
        out << "  " << a << " = (uint64_t)((int64_t)" << b << " >> " << (in.imm & 63) << ");\n";
        break;
      case Op::Load8: load(1); break;
      case Op::Load16: load(2); break;
      case Op::Load32: load(4); break;
      case Op::Load64: load(8); break;
      case Op::Store8: store(1); break;
      case Op::Store16: store(2); break;
      case Op::Store32: store(4); break;
      case Op::Store64: store(8); break;
      case Op::Jmp:
        out << "  ";
        jump();
        out << "\n";
        break;
      case Op::Brz: branch("!" + a); break;
      case Op::Brnz: branch(a); break;
      case Op::Beq: branch(a + " == " + b); break;
      case Op::Bne: branch(a + " != " + b); break;
      case Op::BltU: branch(a + " < " + b); break;
      case Op::BgeU: branch(a + " >= " + b); break;
      case Op::BltS: branch("(int64_t)" + a + " < (int64_t)" + b); break;
      case Op::BgeS: branch("(int64_t)" + a + " >= (int64_t)" + b); break;
      case Op::Call: {
        const Function& callee = m.functions[in.target];
        out << "  DT_METER()\n  " << a << " = f" << in.target << "(env";
        for (unsigned p = 0; p < callee.n_params; ++p) out << ", " << reg(in.b + p);
        out << ");\n  DT_REFRESH();\n";
        break;
      }
      case Op::Ret: out << "  env->depth--;\n  return " << a << ";\n"; break;
      case Op::Host: {
        const HostFnInfo& info = host_fn_info(m.imports[in.target]);
        out << "  { uint64_t args[4] = {";
        for (unsigned p = 0; p < 4; ++p) {
          out << (p ? ", " : "") << (p < info.arity ? reg(in.b + p) : std::string("0"));
        }
        out << "};\n    " << a << " = env->host_call(env, " << static_cast<unsigned>(info.fn)
            << ", args);\n    if (env->trap) dt_trap(env, 0);\n    DT_REFRESH(); }\n";
        break;
      }
      case Op::MemSize: out << "  " << a << " = msz;\n"; break;
      case Op::MemGrow:
        out << "  " << a << " = env->grow(env, " << b << ");\n  if (env->trap) dt_trap(env, 0);\n"
            << "  DT_REFRESH();\n";
        break;
      case Op::MemCopy:
        out << "  env->copy(env, " << a << ", " << b << ", " << c << ");\n"
            << "  if (env->trap) dt_trap(env, 0);\n";
        break;
      case Op::MemFill:
        out << "  env->fill(env, " << a << ", " << b << ", " << c << ");\n"
            << "  if (env->trap) dt_trap(env, 0);\n";
        break;
    }
  }
  out << "}\n\n";
}

std::string generate_c(const Module& m) {
  std::ostringstream out;
  out << kPrelude << "\n";
  for (size_t i = 0; i < m.functions.size(); ++i) {
    emit_signature(out, i, m.functions[i]);
    out << ";\n";
  }
  out << "\n";
  for (size_t i = 0; i < m.functions.size(); ++i) emit_function(out, m, i);
  out << "int dt_run(dt_env* env, uint64_t* result) {\n"
      << "  jmp_buf jb;\n"
      << "  jmp_buf* saved = dt_tls_jb;\n"
      << "  dt_tls_jb = &jb;\n"
      << "  if (setjmp(jb)) { dt_tls_jb = saved; return 1; }\n"
      << "  *result = f" << m.entry << "(env);\n"
      << "  dt_tls_jb = saved;\n"
      << "  return 0;\n"
      << "}\n";
  return out.str();
}

using RunFn = int (*)(AotEnv*, uint64_t*);

struct HostState {
  ExecContext* ctx;
  std::exception_ptr error;
};

template <typename F>
void guarded(AotEnv* env, F&& f) {
  auto* hs = static_cast<HostState*>(env->host);
  try {
    f(*hs->ctx);
  } catch (...) {
    hs->error = std::current_exception();
    env->trap = kTrapHost;
  }
  env->mem = hs->ctx->memory.data();
  env->mem_size = hs->ctx->memory.size();
}

uint64_t aot_host_call(AotEnv* env, uint32_t fn, const uint64_t* args) {
  uint64_t result = 0;
  guarded(env, [&](ExecContext& ctx) { result = host_call(ctx, static_cast<HostFn>(fn), args); });
  return result;
}

int aot_tick(AotEnv* env) {
  guarded(env, [](ExecContext& ctx) { ctx.check_deadline(); });
  return env->trap != kTrapNone;
}

uint64_t aot_grow(AotEnv* env, uint64_t delta) {
  uint64_t result = 0;
  guarded(env, [&](ExecContext& ctx) { result = ctx.grow(delta); });
  return result;
}

void aot_copy(AotEnv* env, uint64_t dst, uint64_t src, uint64_t len) {
  guarded(env, [&](ExecContext& ctx) { ctx.copy(dst, src, len); });
}

void aot_fill(AotEnv* env, uint64_t dst, uint64_t value, uint64_t len) {
  guarded(env, [&](ExecContext& ctx) { ctx.fill(dst, value, len); });
}

class AotCompiled final : public CompiledBase {
 public:
  AotCompiled(Module m, uint64_t cap, uint32_t max_depth, void* handle, RunFn run)
      : CompiledBase(std::move(m), cap), max_depth_(max_depth), handle_(handle), run_(run) {}
  ~AotCompiled() override { ::dlclose(handle_); }

  Engine engine() const override { return Engine::kAot; }

  uint64_t run(ExecContext& ctx) const override {
    HostState hs{&ctx, nullptr};
    AotEnv env{};
    env.mem = ctx.memory.data();
    env.mem_size = ctx.memory.size();
    env.max_depth = max_depth_;
    env.host = &hs;
    env.host_call = aot_host_call;
    env.tick = aot_tick;
    env.grow = aot_grow;
    env.copy = aot_copy;
    env.fill = aot_fill;
    uint64_t result = 0;
    if (run_(&env, &result) == 0) return result;
    switch (env.trap) {
      case kTrapHost:
        std::rethrow_exception(hs.error);
      case kTrapBounds: throw AppFault("memory access out of bounds");
      case kTrapDivZero: throw AppFault("integer divide by zero");
      case kTrapOverflow: throw AppFault("integer overflow");
      case kTrapUnreachable: throw AppFault("unreachable executed");
      case kTrapDepth: throw AppFault("call stack exhausted");
      default: throw AppFault("trap " + std::to_string(env.trap));
    }
  }

 private:
  uint32_t max_depth_;
  void* handle_;
  RunFn run_;
};

const char* compiler() {
  const char* cc = std::getenv("DTRUST_CC");
  return cc && *cc ? cc : "cc";
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::filesystem::path default_cache_dir() {
  return std::filesystem::temp_directory_path() / ("dtrust-aot-" + std::to_string(::getuid()));
}

std::mutex& compile_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

std::shared_ptr<const CompiledBase> compile_aot(Module m, const SandboxLimits& limits,
                                                const Digest& digest, const std::string& cache_dir) {
  namespace fs = std::filesystem;
  fs::path dir = cache_dir.empty() ? default_cache_dir() : fs::path(cache_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw LoadError("cannot create AOT cache dir " + dir.string() + ": " + ec.message());

  std::string stem = digest.hex() + "-v" + std::to_string(kCodegenVersion);
  fs::path so = dir / (stem + ".so");

  std::lock_guard lock(compile_mutex());
  if (!fs::exists(so)) {
    std::string tag = std::to_string(::getpid());
    fs::path c_file = dir / (stem + "." + tag + ".c");
    fs::path tmp_so = dir / (stem + "." + tag + ".so");
    {
      std::ofstream f(c_file);
      f << generate_c(m);
      if (!f) throw LoadError("cannot write " + c_file.string());
    }
    std::string cmd = std::string(compiler()) + " -std=gnu11 -O2 -shared -fPIC -w -o " +
                      shell_quote(tmp_so.string()) + " " + shell_quote(c_file.string()) +
                      " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    fs::remove(c_file, ec);
    if (rc != 0) {
      fs::remove(tmp_so, ec);
      throw LoadError("AOT compilation failed (exit " + std::to_string(rc) + ")");
    }
    fs::rename(tmp_so, so, ec);
    if (ec) throw LoadError("cannot install AOT artifact: " + ec.message());
  }

  void* handle = ::dlopen(so.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!handle) throw LoadError(std::string("cannot load AOT artifact: ") + ::dlerror());
  auto run = reinterpret_cast<RunFn>(::dlsym(handle, "dt_run"));
  if (!run) {
    ::dlclose(handle);
    throw LoadError("AOT artifact lacks dt_run");
  }
  uint64_t cap = limits.max_memory_bytes;
  if (m.max_memory != 0) cap = std::min<uint64_t>(cap, m.max_memory);
  return std::make_shared<AotCompiled>(std::move(m), cap, limits.max_call_depth, handle, run);
}

}  // namespace internal

bool aot_available() {
  static const bool available = [] {
    std::string cmd = std::string(internal::compiler()) + " --version >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  }();
  return available;
}

}  // namespace dtrust::sandbox
