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

#include "dtrust/sandbox/bytecode.h"

#include <array>
#include <set>

#include "dtrust/sandbox/sandbox.h"

namespace dtrust::sandbox {

namespace {

const std::vector<OpInfo>& all_ops() {
  static const std::vector<OpInfo> ops = {
#define DTRUST_OP_INFO(name, code, mnemonic, shape) {Op::name, mnemonic, Shape::shape},
      DTRUST_OPCODES(DTRUST_OP_INFO)
#undef DTRUST_OP_INFO
  };
  return ops;
}

const std::array<HostFnInfo, 6> kHostFns = {{
    {HostFn::kRequestLen, "request_len", 0},
    {HostFn::kRequestRead, "request_read", 3},
    {HostFn::kResponseWrite, "response_write", 2},
    {HostFn::kStoreGet, "store_get", 4},
    {HostFn::kStorePut, "store_put", 4},
    {HostFn::kStoreDelete, "store_delete", 2},
}};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  ByteView take(size_t n) {
    if (n > in_.size() - pos_) throw LoadError("truncated module");
    ByteView out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  uint64_t le(size_t n) {
    ByteView b = take(n);
    uint64_t v = 0;
    for (size_t i = 0; i < n; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }
  uint8_t u8() { return static_cast<uint8_t>(le(1)); }
  uint16_t u16() { return static_cast<uint16_t>(le(2)); }
  uint32_t u32() { return static_cast<uint32_t>(le(4)); }
  std::string name() {
    ByteView b = take(u8());
    return std::string(b.begin(), b.end());
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  ByteView in_;
  size_t pos_ = 0;
};

void put_le(Bytes& out, uint64_t v, size_t n) {
  for (size_t i = 0; i < n; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_name(Bytes& out, const std::string& name) {
  if (name.size() > 255) throw LoadError("name too long: " + name);
  out.push_back(static_cast<uint8_t>(name.size()));
  append(out, as_bytes(name));
}

struct PendingFunction {
  Function fn;
  // Byte offsets of branch targets, resolved after decoding.
  std::vector<uint32_t> byte_targets;
};

std::string where(size_t func, size_t insn) {
  return "function " + std::to_string(func) + " instruction " + std::to_string(insn) + ": ";
}

PendingFunction decode_function(size_t index, uint8_t n_params, uint8_t n_regs, ByteView code) {
  if (n_regs == 0 || n_regs < n_params) {
    throw LoadError("function " + std::to_string(index) + ": bad register count");
  }
  if (code.empty()) throw LoadError("function " + std::to_string(index) + ": empty body");

  PendingFunction out;
  out.fn.n_params = n_params;
  out.fn.n_regs = n_regs;
  std::vector<int32_t> insn_at(code.size() + 1, -1);
  Reader r(code);
  size_t pos = 0;
  while (pos < code.size()) {
    insn_at[pos] = static_cast<int32_t>(out.fn.code.size());
    size_t n = out.fn.code.size();
    auto info = op_info(code[pos]);
    if (!info) throw LoadError(where(index, n) + "invalid opcode 0x" + to_hex(code.subspan(pos, 1)));
    r.u8();
    Insn insn;
    insn.op = info->op;
    auto reg = [&](uint8_t& slot) {
      slot = r.u8();
      if (slot >= n_regs) throw LoadError(where(index, n) + "register out of range");
    };
    uint32_t byte_target = 0;
    switch (info->shape) {
      case Shape::kNone: break;
      case Shape::kR: reg(insn.a); break;
      case Shape::kRR: reg(insn.a); reg(insn.b); break;
      case Shape::kRRR: reg(insn.a); reg(insn.b); reg(insn.c); break;
      case Shape::kRI:
        reg(insn.a);
        insn.imm = static_cast<int64_t>(r.le(8));
        break;
      case Shape::kRRI:
        reg(insn.a);
        reg(insn.b);
        insn.imm = static_cast<int64_t>(r.le(8));
        break;
      case Shape::kRRM:
        reg(insn.a);
        reg(insn.b);
        insn.imm = static_cast<int32_t>(r.u32());
        break;
      case Shape::kT: byte_target = r.u32(); break;
      case Shape::kRT:
        reg(insn.a);
        byte_target = r.u32();
        break;
      case Shape::kRRT:
        reg(insn.a);
        reg(insn.b);
        byte_target = r.u32();
        break;
      case Shape::kCall:
      case Shape::kHost:
        reg(insn.a);
        insn.target = r.u16();
        insn.b = r.u8();  // argbase; range-checked once arities are known
        break;
    }
    out.fn.code.push_back(insn);
    out.byte_targets.push_back(byte_target);
    pos += 1 + operand_size(info->shape);
  }

  for (size_t i = 0; i < out.fn.code.size(); ++i) {
    Insn& insn = out.fn.code[i];
    Shape shape = op_info(static_cast<uint8_t>(insn.op))->shape;
    if (shape == Shape::kT || shape == Shape::kRT || shape == Shape::kRRT) {
      uint32_t t = out.byte_targets[i];
      if (t >= code.size() || insn_at[t] < 0) {
        throw LoadError(where(index, i) + "branch target is not an instruction boundary");
      }
      insn.target = static_cast<uint32_t>(insn_at[t]);
    }
  }
  Op last = out.fn.code.back().op;
  if (last != Op::Ret && last != Op::Jmp && last != Op::Unreachable) {
    throw LoadError("function " + std::to_string(index) + ": control falls off the end");
  }
  return out;
}

}  // namespace

std::optional<OpInfo> op_info(uint8_t code) {
  static const auto table = [] {
    std::array<std::optional<OpInfo>, 256> t{};
    for (const OpInfo& info : all_ops()) t[static_cast<uint8_t>(info.op)] = info;
    return t;
  }();
  return table[code];
}

std::optional<OpInfo> op_by_mnemonic(std::string_view mnemonic) {
  for (const OpInfo& info : all_ops()) {
    if (mnemonic == info.mnemonic) return info;
  }
  return std::nullopt;
}

size_t operand_size(Shape shape) {
  switch (shape) {
    case Shape::kNone: return 0;
    case Shape::kR: return 1;
    case Shape::kRR: return 2;
    case Shape::kRRR: return 3;
    case Shape::kRI: return 9;
    case Shape::kRRI: return 10;
    case Shape::kRRM: return 6;
    case Shape::kT: return 4;
    case Shape::kRT: return 5;
    case Shape::kRRT: return 6;
    case Shape::kCall:
    case Shape::kHost: return 4;
  }
  return 0;
}

std::optional<HostFnInfo> host_fn_by_name(std::string_view name) {
  for (const HostFnInfo& info : kHostFns) {
    if (name == info.name) return info;
  }
  return std::nullopt;
}

const HostFnInfo& host_fn_info(HostFn fn) { return kHostFns[static_cast<size_t>(fn)]; }

Module parse_module(ByteView bytes) {
  Reader r(bytes);
  ByteView magic = r.take(4);
  if (dtrust::to_string(magic) != "DTBC") throw LoadError("bad magic");
  if (uint8_t version = r.u8(); version != 1) {
    throw LoadError("unsupported module version " + std::to_string(version));
  }

  Module m;
  m.initial_memory = r.u32();
  m.max_memory = r.u32();
  if (m.max_memory != 0 && m.initial_memory > m.max_memory) {
    throw LoadError("initial memory exceeds declared maximum");
  }

  uint16_t n_imports = r.u16();
  std::set<std::string> seen;
  for (uint16_t i = 0; i < n_imports; ++i) {
    std::string name = r.name();
    auto info = host_fn_by_name(name);
    if (!info) throw ForbiddenImport(name);
    if (!seen.insert(name).second) throw LoadError("duplicate import " + name);
    m.import_names.push_back(name);
    m.imports.push_back(info->fn);
  }

  uint16_t n_funcs = r.u16();
  if (n_funcs == 0) throw LoadError("module has no functions");
  if (n_funcs > kMaxFunctions) throw LoadError("too many functions");
  for (uint16_t i = 0; i < n_funcs; ++i) {
    uint8_t n_params = r.u8();
    uint8_t n_regs = r.u8();
    uint32_t len = r.u32();
    if (len > kMaxCodeBytes) throw LoadError("function body too large");
    m.functions.push_back(decode_function(i, n_params, n_regs, r.take(len)).fn);
  }

  // Call and host-call operands need every function's arity.
  for (size_t f = 0; f < m.functions.size(); ++f) {
    const Function& fn = m.functions[f];
    for (size_t i = 0; i < fn.code.size(); ++i) {
      const Insn& insn = fn.code[i];
      size_t arity = 0;
      if (insn.op == Op::Call) {
        if (insn.target >= m.functions.size()) throw LoadError(where(f, i) + "call to unknown function");
        arity = m.functions[insn.target].n_params;
      } else if (insn.op == Op::Host) {
        if (insn.target >= m.imports.size()) throw LoadError(where(f, i) + "host call to unknown import");
        arity = host_fn_info(m.imports[insn.target]).arity;
      } else {
        continue;
      }
      if (static_cast<size_t>(insn.b) + arity > fn.n_regs) {
        throw LoadError(where(f, i) + "argument registers out of range");
      }
    }
  }

  uint16_t n_data = r.u16();
  for (uint16_t i = 0; i < n_data; ++i) {
    DataSegment seg;
    seg.offset = r.u32();
    uint32_t len = r.u32();
    ByteView b = r.take(len);
    if (static_cast<uint64_t>(seg.offset) + len > m.initial_memory) {
      throw LoadError("data segment " + std::to_string(i) + " outside initial memory");
    }
    seg.bytes.assign(b.begin(), b.end());
    m.data.push_back(std::move(seg));
  }

  uint16_t n_exports = r.u16();
  std::optional<uint16_t> entry;
  for (uint16_t i = 0; i < n_exports; ++i) {
    std::string name = r.name();
    uint16_t func = r.u16();
    if (name != "handle") throw LoadError("unsupported export " + name);
    if (entry) throw LoadError("duplicate export handle");
    if (func >= m.functions.size()) throw LoadError("export refers to unknown function");
    if (m.functions[func].n_params != 0) throw LoadError("handle must take no parameters");
    entry = func;
  }
  if (!entry) throw LoadError("module does not export handle");
  m.entry = *entry;
  if (!r.done()) throw LoadError("trailing bytes after module");
  return m;
}

Bytes serialize_module(const RawModule& m) {
  Bytes out = to_bytes("DTBC");
  out.push_back(1);
  put_le(out, m.initial_memory, 4);
  put_le(out, m.max_memory, 4);
  put_le(out, m.imports.size(), 2);
  for (const auto& name : m.imports) put_name(out, name);
  put_le(out, m.functions.size(), 2);
  for (const RawFunction& f : m.functions) {
    out.push_back(f.n_params);
    out.push_back(f.n_regs);
    put_le(out, f.code.size(), 4);
    append(out, f.code);
  }
  put_le(out, m.data.size(), 2);
  for (const DataSegment& d : m.data) {
    put_le(out, d.offset, 4);
    put_le(out, d.bytes.size(), 4);
    append(out, d.bytes);
  }
  put_le(out, m.exports.size(), 2);
  for (const auto& [name, func] : m.exports) {
    put_name(out, name);
    put_le(out, func, 2);
  }
  return out;
}

}  // namespace dtrust::sandbox
