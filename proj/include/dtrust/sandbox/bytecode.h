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

// Portable bytecode module format executed by the sandbox.
//
// A module is a register machine program: every function owns up to 255
// 64-bit registers (parameters arrive in r0..r{n-1}), and all data lives in a
// single bounds-checked linear memory. The only way out of the sandbox is a
// host call through an import on the fixed allow-list below.
//
// Binary layout (integers little-endian):
//
//   "DTBC" u8 version=1
//   u32 initial_memory  u32 max_memory (0 = bounded only by SandboxLimits)
//   u16 n_imports   { u8 len, name }
//   u16 n_functions { u8 n_params, u8 n_regs, u32 code_len, code }
//   u16 n_data      { u32 offset, u32 len, bytes }
//   u16 n_exports   { u8 len, name, u16 function }
//
// Instruction operands: R = u8 register, I = i64, M = i32 memory offset,
// T = u32 byte offset of the target instruction within the function,
// F = u16 function index, H = u16 import index.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtrust/canon/bytes.h"

namespace dtrust::sandbox {

enum class Shape : uint8_t {
  kNone,   // op
  kR,      // op rd
  kRR,     // op rd, ra
  kRRR,    // op rd, ra, rb
  kRI,     // op rd, imm64
  kRRI,    // op rd, ra, imm64
  kRRM,    // op r, r, off32
  kT,      // op target
  kRT,     // op ra, target
  kRRT,    // op ra, rb, target
  kCall,   // op rd, func, argbase
  kHost,   // op rd, import, argbase
};

// X(name, code, mnemonic, shape)
#define DTRUST_OPCODES(X)                  \
  X(Nop, 0x00, "nop", kNone)               \
  X(Unreachable, 0x01, "unreachable", kNone) \
  X(Const, 0x02, "const", kRI)             \
  X(Mov, 0x03, "mov", kRR)                 \
  X(Add, 0x10, "add", kRRR)                \
  X(Sub, 0x11, "sub", kRRR)                \
  X(Mul, 0x12, "mul", kRRR)                \
  X(DivU, 0x13, "divu", kRRR)              \
  X(RemU, 0x14, "remu", kRRR)              \
  X(DivS, 0x15, "divs", kRRR)              \
  X(RemS, 0x16, "rems", kRRR)              \
  X(And, 0x17, "and", kRRR)                \
  X(Or, 0x18, "or", kRRR)                  \
  X(Xor, 0x19, "xor", kRRR)                \
  X(Shl, 0x1a, "shl", kRRR)                \
  X(ShrU, 0x1b, "shru", kRRR)              \
  X(ShrS, 0x1c, "shrs", kRRR)              \
  X(MulHU, 0x1d, "mulhu", kRRR)            \
  X(Eq, 0x20, "eq", kRRR)                  \
  X(Ne, 0x21, "ne", kRRR)                  \
  X(LtU, 0x22, "ltu", kRRR)                \
  X(LtS, 0x23, "lts", kRRR)                \
  X(LeU, 0x24, "leu", kRRR)                \
  X(LeS, 0x25, "les", kRRR)                \
  X(Eqz, 0x26, "eqz", kRR)                 \
  X(AddI, 0x30, "addi", kRRI)              \
  X(MulI, 0x31, "muli", kRRI)              \
  X(AndI, 0x32, "andi", kRRI)              \
  X(OrI, 0x33, "ori", kRRI)                \
  X(XorI, 0x34, "xori", kRRI)              \
  X(ShlI, 0x35, "shli", kRRI)              \
  X(ShrUI, 0x36, "shrui", kRRI)            \
  X(ShrSI, 0x37, "shrsi", kRRI)            \
  X(Load8, 0x40, "load8", kRRM)            \
  X(Load16, 0x41, "load16", kRRM)          \
  X(Load32, 0x42, "load32", kRRM)          \
  X(Load64, 0x43, "load64", kRRM)          \
  X(Store8, 0x44, "store8", kRRM)          \
  X(Store16, 0x45, "store16", kRRM)        \
  X(Store32, 0x46, "store32", kRRM)        \
  X(Store64, 0x47, "store64", kRRM)        \
  X(Jmp, 0x50, "jmp", kT)                  \
  X(Brz, 0x51, "brz", kRT)                 \
  X(Brnz, 0x52, "brnz", kRT)               \
  X(Beq, 0x53, "beq", kRRT)                \
  X(Bne, 0x54, "bne", kRRT)                \
  X(BltU, 0x55, "bltu", kRRT)              \
  X(BgeU, 0x56, "bgeu", kRRT)              \
  X(BltS, 0x57, "blts", kRRT)              \
  X(BgeS, 0x58, "bges", kRRT)              \
  X(Call, 0x60, "call", kCall)             \
  X(Ret, 0x61, "ret", kR)                  \
  X(Host, 0x62, "host", kHost)             \
  X(MemSize, 0x70, "memsize", kR)          \
  X(MemGrow, 0x71, "memgrow", kRR)         \
  X(MemCopy, 0x72, "memcopy", kRRR)        \
  X(MemFill, 0x73, "memfill", kRRR)

enum class Op : uint8_t {
#define DTRUST_OP_ENUM(name, code, mnemonic, shape) name = code,
  DTRUST_OPCODES(DTRUST_OP_ENUM)
#undef DTRUST_OP_ENUM
};

struct OpInfo {
  Op op;
  const char* mnemonic;
  Shape shape;
};

// nullopt for bytes that are not opcodes.
std::optional<OpInfo> op_info(uint8_t code);
std::optional<OpInfo> op_by_mnemonic(std::string_view mnemonic);
size_t operand_size(Shape shape);

// Host calls on the import allow-list. Arguments are registers argbase..;
// the result lands in rd.
enum class HostFn : uint8_t {
  kRequestLen,     // () -> len
  kRequestRead,    // (dst, offset, len) -> copied
  kResponseWrite,  // (src, len) -> 0
  kStoreGet,       // (key, key_len, dst, cap) -> value_len | ~0 if absent
  kStorePut,       // (key, key_len, val, val_len) -> 0
  kStoreDelete,    // (key, key_len) -> 1 if removed, else 0
};

struct HostFnInfo {
  HostFn fn;
  const char* name;
  uint8_t arity;
};

std::optional<HostFnInfo> host_fn_by_name(std::string_view name);
const HostFnInfo& host_fn_info(HostFn fn);

inline constexpr uint64_t kAbsent = ~uint64_t{0};
inline constexpr uint32_t kMaxFunctions = 4096;
inline constexpr uint32_t kMaxCodeBytes = 1u << 20;

// Decoded instruction. For branches `target` is an instruction index; for
// calls it is the function index, for host calls the import index.
struct Insn {
  Op op = Op::Nop;
  uint8_t a = 0;
  uint8_t b = 0;
  uint8_t c = 0;
  uint32_t target = 0;
  int64_t imm = 0;
};

struct Function {
  uint8_t n_params = 0;
  uint8_t n_regs = 1;
  std::vector<Insn> code;
};

struct DataSegment {
  uint32_t offset = 0;
  Bytes bytes;
};

struct Module {
  uint32_t initial_memory = 0;
  uint32_t max_memory = 0;
  std::vector<std::string> import_names;
  std::vector<HostFn> imports;
  std::vector<Function> functions;
  std::vector<DataSegment> data;
  uint32_t entry = 0;  // index of the exported "handle" function
};

// Parses and fully validates a module: every register, branch target,
// call and import index is checked here so the engines can execute without
// re-checking. Throws LoadError, or ForbiddenImport for imports outside the
// allow-list.
Module parse_module(ByteView bytes);

// Raw (pre-validation) module description produced by the assembler.
struct RawFunction {
  uint8_t n_params = 0;
  uint8_t n_regs = 1;
  Bytes code;
};

struct RawModule {
  uint32_t initial_memory = 0;
  uint32_t max_memory = 0;
  std::vector<std::string> imports;
  std::vector<RawFunction> functions;
  std::vector<DataSegment> data;
  std::vector<std::pair<std::string, uint16_t>> exports;
};

Bytes serialize_module(const RawModule& m);

}  // namespace dtrust::sandbox
