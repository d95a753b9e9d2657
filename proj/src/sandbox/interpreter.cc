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

#include <cstring>
#include <limits>

#include "runtime.h"

namespace dtrust::sandbox::internal {

namespace {

struct Frame {
  uint32_t func;
  uint32_t pc;  // instruction to resume at
  size_t base;
  uint8_t ret_reg;
};

class Interpreted final : public CompiledBase {
 public:
  Interpreted(Module m, uint64_t cap, uint32_t max_depth)
      : CompiledBase(std::move(m), cap), max_depth_(max_depth) {}

  Engine engine() const override { return Engine::kInterpreter; }

  uint64_t run(ExecContext& ctx) const override;

 private:
  uint32_t max_depth_;
};

[[noreturn]] void fault(const char* what) { throw AppFault(what); }

template <size_t N>
inline uint8_t* at(ExecContext& ctx, uint64_t addr) {
  size_t size = ctx.memory.size();
  if (addr > size || size - addr < N) {
    throw AppFault("memory access out of bounds at " + std::to_string(addr));
  }
  return ctx.memory.data() + addr;
}

template <typename T>
inline uint64_t load(ExecContext& ctx, uint64_t addr) {
  T v;
  std::memcpy(&v, at<sizeof(T)>(ctx, addr), sizeof(T));
  return v;
}

template <typename T>
inline void store(ExecContext& ctx, uint64_t addr, uint64_t v) {
  T t = static_cast<T>(v);
  std::memcpy(at<sizeof(T)>(ctx, addr), &t, sizeof(T));
}

uint64_t Interpreted::run(ExecContext& ctx) const {
  const Module& m = module();
  std::vector<Frame> frames;
  frames.reserve(64);
  std::vector<uint64_t>& regs = ctx.registers;

  uint32_t func = m.entry;
  const Function* fn = &m.functions[func];
  size_t base = 0;
  if (regs.size() < fn->n_regs) regs.resize(std::max<size_t>(fn->n_regs, 4096));
  std::fill(regs.begin(), regs.begin() + fn->n_regs, 0);

  const Insn* code = fn->code.data();
  uint64_t* r = regs.data();
  uint32_t pc = 0;
  uint32_t fuel = kFuelSlice;

  auto meter = [&]() {
    if (--fuel == 0) {
      fuel = kFuelSlice;
      ctx.check_deadline();
    }
  };

  for (;;) {
    const Insn& in = code[pc];
    uint32_t next = pc + 1;
    switch (in.op) {
      case Op::Nop: break;
      case Op::Unreachable: fault("unreachable executed");
      case Op::Const: r[in.a] = static_cast<uint64_t>(in.imm); break;
      case Op::Mov: r[in.a] = r[in.b]; break;

      case Op::Add: r[in.a] = r[in.b] + r[in.c]; break;
      case Op::Sub: r[in.a] = r[in.b] - r[in.c]; break;
      case Op::Mul: r[in.a] = r[in.b] * r[in.c]; break;
      case Op::DivU:
        if (r[in.c] == 0) fault("integer divide by zero");
        r[in.a] = r[in.b] / r[in.c];
        break;
      case Op::RemU:
        if (r[in.c] == 0) fault("integer divide by zero");
        r[in.a] = r[in.b] % r[in.c];
        break;
      case Op::DivS: {
        int64_t x = static_cast<int64_t>(r[in.b]), y = static_cast<int64_t>(r[in.c]);
        if (y == 0) fault("integer divide by zero");
        if (x == std::numeric_limits<int64_t>::min() && y == -1) fault("integer overflow");
        r[in.a] = static_cast<uint64_t>(x / y);
        break;
      }
      case Op::RemS: {
        int64_t x = static_cast<int64_t>(r[in.b]), y = static_cast<int64_t>(r[in.c]);
        if (y == 0) fault("integer divide by zero");
        r[in.a] = y == -1 ? 0 : static_cast<uint64_t>(x % y);
        break;
      }
      case Op::And: r[in.a] = r[in.b] & r[in.c]; break;
      case Op::Or: r[in.a] = r[in.b] | r[in.c]; break;
      case Op::Xor: r[in.a] = r[in.b] ^ r[in.c]; break;
      case Op::Shl: r[in.a] = r[in.b] << (r[in.c] & 63); break;
      case Op::ShrU: r[in.a] = r[in.b] >> (r[in.c] & 63); break;
      case Op::ShrS:
        r[in.a] = static_cast<uint64_t>(static_cast<int64_t>(r[in.b]) >> (r[in.c] & 63));
        break;
      case Op::MulHU:
        r[in.a] = static_cast<uint64_t>((static_cast<unsigned __int128>(r[in.b]) * r[in.c]) >> 64);
        break;

      case Op::Eq: r[in.a] = r[in.b] == r[in.c]; break;
      case Op::Ne: r[in.a] = r[in.b] != r[in.c]; break;
      case Op::LtU: r[in.a] = r[in.b] < r[in.c]; break;
      case Op::LtS: r[in.a] = static_cast<int64_t>(r[in.b]) < static_cast<int64_t>(r[in.c]); break;
      case Op::LeU: r[in.a] = r[in.b] <= r[in.c]; break;
      case Op::LeS: r[in.a] = static_cast<int64_t>(r[in.b]) <= static_cast<int64_t>(r[in.c]); break;
      case Op::Eqz: r[in.a] = r[in.b] == 0; break;

      case Op::AddI: r[in.a] = r[in.b] + static_cast<uint64_t>(in.imm); break;
      case Op::MulI: r[in.a] = r[in.b] * static_cast<uint64_t>(in.imm); break;
      case Op::AndI: r[in.a] = r[in.b] & static_cast<uint64_t>(in.imm); break;
      case Op::OrI: r[in.a] = r[in.b] | static_cast<uint64_t>(in.imm); break;
      case Op::XorI: r[in.a] = r[in.b] ^ static_cast<uint64_t>(in.imm); break;
      case Op::ShlI: r[in.a] = r[in.b] << (in.imm & 63); break;
      case Op::ShrUI: r[in.a] = r[in.b] >> (in.imm & 63); break;
      case Op::ShrSI:
        r[in.a] = static_cast<uint64_t>(static_cast<int64_t>(r[in.b]) >> (in.imm & 63));
        break;

      case Op::Load8: r[in.a] = load<uint8_t>(ctx, r[in.b] + in.imm); break;
      case Op::Load16: r[in.a] = load<uint16_t>(ctx, r[in.b] + in.imm); break;
      case Op::Load32: r[in.a] = load<uint32_t>(ctx, r[in.b] + in.imm); break;
      case Op::Load64: r[in.a] = load<uint64_t>(ctx, r[in.b] + in.imm); break;
      case Op::Store8: store<uint8_t>(ctx, r[in.a] + in.imm, r[in.b]); break;
      case Op::Store16: store<uint16_t>(ctx, r[in.a] + in.imm, r[in.b]); break;
      case Op::Store32: store<uint32_t>(ctx, r[in.a] + in.imm, r[in.b]); break;
      case Op::Store64: store<uint64_t>(ctx, r[in.a] + in.imm, r[in.b]); break;

      case Op::Jmp: next = in.target; break;
      case Op::Brz: if (r[in.a] == 0) next = in.target; break;
      case Op::Brnz: if (r[in.a] != 0) next = in.target; break;
      case Op::Beq: if (r[in.a] == r[in.b]) next = in.target; break;
      case Op::Bne: if (r[in.a] != r[in.b]) next = in.target; break;
      case Op::BltU: if (r[in.a] < r[in.b]) next = in.target; break;
      case Op::BgeU: if (r[in.a] >= r[in.b]) next = in.target; break;
      case Op::BltS:
        if (static_cast<int64_t>(r[in.a]) < static_cast<int64_t>(r[in.b])) next = in.target;
        break;
      case Op::BgeS:
        if (static_cast<int64_t>(r[in.a]) >= static_cast<int64_t>(r[in.b])) next = in.target;
        break;

      case Op::Call: {
        meter();
        if (frames.size() + 1 >= max_depth_) fault("call stack exhausted");
        const Function& callee = m.functions[in.target];
        size_t callee_base = base + fn->n_regs;
        if (regs.size() < callee_base + callee.n_regs) {
          regs.resize(std::max(regs.size() * 2, callee_base + callee.n_regs));
          r = regs.data() + base;
        }
        uint64_t* cr = regs.data() + callee_base;
        std::memcpy(cr, r + in.b, callee.n_params * sizeof(uint64_t));
        std::fill(cr + callee.n_params, cr + callee.n_regs, 0);
        frames.push_back({func, next, base, in.a});
        func = in.target;
        fn = &callee;
        base = callee_base;
        code = fn->code.data();
        r = cr;
        pc = 0;
        continue;
      }
      case Op::Ret: {
        uint64_t value = r[in.a];
        if (frames.empty()) return value;
        Frame f = frames.back();
        frames.pop_back();
        func = f.func;
        fn = &m.functions[func];
        base = f.base;
        code = fn->code.data();
        r = regs.data() + base;
        r[f.ret_reg] = value;
        pc = f.pc;
        continue;
      }
      case Op::Host:
        r[in.a] = host_call(ctx, m.imports[in.target], r + in.b);
        break;

      case Op::MemSize: r[in.a] = ctx.memory.size(); break;
      case Op::MemGrow: r[in.a] = ctx.grow(r[in.b]); break;
      case Op::MemCopy: ctx.copy(r[in.a], r[in.b], r[in.c]); break;
      case Op::MemFill: ctx.fill(r[in.a], r[in.b], r[in.c]); break;
    }
    if (next <= pc) meter();
    pc = next;
  }
}

}  // namespace

std::shared_ptr<const CompiledBase> compile_interpreter(Module m, const SandboxLimits& limits) {
  uint64_t cap = limits.max_memory_bytes;
  if (m.max_memory != 0) cap = std::min<uint64_t>(cap, m.max_memory);
  return std::make_shared<Interpreted>(std::move(m), cap, limits.max_call_depth);
}

}  // namespace dtrust::sandbox::internal
