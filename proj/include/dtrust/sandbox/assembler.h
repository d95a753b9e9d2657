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

// Text assembler for sandbox modules.
//
//   ; comment
//   .memory 65536              initial linear memory in bytes
//   .max_memory 1048576        optional cap below the runtime limit
//   .import store_get          host call on the allow-list
//   .equ BUF 0x100             named constant, usable wherever an immediate is
//   .data BUF "text\n"         initial memory contents; x"0a0b" for hex
//   .func name params=2 regs=8 starts a function (defaults: params=0 regs=16)
//   loop:                      label, local to the enclosing function
//   addi r1, r1, 1
//   load8 r2, r1, BUF+4        loads:  rd, base, offset
//   store8 r1, r2, 0           stores: base, value, offset
//   call r0, name, r4          rd, function, first argument register
//   host r0, store_get, r4     rd, import, first argument register
//   .export handle             defaults to the function named "handle"

#include <stdexcept>
#include <string>
#include <string_view>

#include "dtrust/canon/bytes.h"

namespace dtrust::sandbox {

class AssembleError : public Error {
 public:
  AssembleError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Bytes assemble(std::string_view source);

}  // namespace dtrust::sandbox
