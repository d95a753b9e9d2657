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

#include "dtrust/sandbox/assembler.h"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "dtrust/sandbox/bytecode.h"

namespace dtrust::sandbox {

namespace {

struct Line {
  int number;
  std::string text;
};

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (!quoted && (s[i] == ';' || s[i] == '#')) return std::string(s.substr(0, i));
  }
  return std::string(s);
}

std::vector<std::string> split_operands(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

void put_le(Bytes& out, uint64_t v, size_t n) {
  for (size_t i = 0; i < n; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Assembler {
 public:
  explicit Assembler(std::string_view source) {
    std::istringstream in{std::string(source)};
    std::string text;
    int n = 0;
    while (std::getline(in, text)) {
      ++n;
      std::string t = trim(strip_comment(text));
      if (!t.empty()) lines_.push_back({n, t});
    }
  }

  Bytes run() {
    first_pass();
    second_pass();
    if (module_.exports.empty()) {
      auto it = func_index_.find("handle");
      if (it == func_index_.end()) throw AssembleError(0, "no function named handle to export");
      module_.exports.emplace_back("handle", it->second);
    }
    return serialize_module(module_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw AssembleError(line_, what); }

  void first_pass() {
    for (const Line& l : lines_) {
      line_ = l.number;
      std::istringstream ss(l.text);
      std::string head;
      ss >> head;
      if (head == ".func") {
        std::string name;
        ss >> name;
        if (name.empty()) fail(".func needs a name");
        if (func_index_.count(name)) fail("duplicate function " + name);
        func_index_[name] = static_cast<uint16_t>(func_index_.size());
      } else if (head == ".equ") {
        std::string name, value;
        ss >> name;
        std::getline(ss, value);
        if (name.empty()) fail(".equ needs a name");
        symbols_[name] = eval(trim(value));
      } else if (head == ".import") {
        std::string name;
        ss >> name;
        if (import_index_.count(name)) fail("duplicate import " + name);
        import_index_[name] = static_cast<uint16_t>(module_.imports.size());
        module_.imports.push_back(name);
      }
    }
  }

  void second_pass() {
    RawFunction* fn = nullptr;
    std::map<std::string, uint32_t> labels;
    struct Fixup {
      size_t at;
      std::string label;
      int line;
    };
    std::vector<Fixup> fixups;

    auto close_function = [&]() {
      if (!fn) return;
      for (const Fixup& f : fixups) {
        auto it = labels.find(f.label);
        if (it == labels.end()) throw AssembleError(f.line, "undefined label " + f.label);
        for (size_t i = 0; i < 4; ++i) fn->code[f.at + i] = static_cast<uint8_t>(it->second >> (8 * i));
      }
      labels.clear();
      fixups.clear();
      fn = nullptr;
    };

    for (const Line& l : lines_) {
      line_ = l.number;
      const std::string& t = l.text;
      if (t[0] == '.') {
        std::istringstream ss(t);
        std::string head;
        ss >> head;
        if (head == ".func") {
          close_function();
          std::string name, kv;
          ss >> name;
          RawFunction f;
          f.n_regs = 16;
          while (ss >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) fail("expected key=value, got " + kv);
            std::string key = kv.substr(0, eq);
            int64_t v = eval(kv.substr(eq + 1));
            if (v < 0 || v > 255) fail(key + " out of range");
            if (key == "params") {
              f.n_params = static_cast<uint8_t>(v);
            } else if (key == "regs") {
              f.n_regs = static_cast<uint8_t>(v);
            } else {
              fail("unknown function attribute " + key);
            }
          }
          module_.functions.push_back(std::move(f));
          fn = &module_.functions.back();
        } else if (head == ".end") {
          close_function();
        } else if (head == ".memory") {
          module_.initial_memory = static_cast<uint32_t>(eval(rest(ss)));
        } else if (head == ".max_memory") {
          module_.max_memory = static_cast<uint32_t>(eval(rest(ss)));
        } else if (head == ".data") {
          parse_data(rest(ss));
        } else if (head == ".export") {
          std::string name;
          ss >> name;
          auto it = func_index_.find(name);
          if (it == func_index_.end()) fail("export of unknown function " + name);
          module_.exports.emplace_back("handle", it->second);
        } else if (head != ".equ" && head != ".import") {
          fail("unknown directive " + head);
        }
        continue;
      }
      if (!fn) fail("instruction outside of a function");

      std::string body = t;
      if (auto colon = body.find(':'); colon != std::string::npos &&
                                        body.find('"') == std::string::npos) {
        std::string label = trim(body.substr(0, colon));
        if (label.empty() || label.find(' ') != std::string::npos) fail("bad label");
        if (labels.count(label)) fail("duplicate label " + label);
        labels[label] = static_cast<uint32_t>(fn->code.size());
        body = trim(body.substr(colon + 1));
        if (body.empty()) continue;
      }

      std::string mnemonic = body.substr(0, body.find_first_of(" \t"));
      std::string operand_text =
          mnemonic.size() < body.size() ? body.substr(mnemonic.size()) : std::string();
      auto ops = split_operands(operand_text);
      auto info = op_by_mnemonic(mnemonic);
      if (!info) fail("unknown instruction " + mnemonic);

      Bytes& code = fn->code;
      code.push_back(static_cast<uint8_t>(info->op));
      auto need = [&](size_t n) {
        if (ops.size() != n) {
          fail(mnemonic + " takes " + std::to_string(n) + " operands, got " +
               std::to_string(ops.size()));
        }
      };
      auto reg = [&](const std::string& s) { code.push_back(parse_reg(s)); };
      auto target = [&](const std::string& s) {
        fixups.push_back({code.size(), s, line_});
        put_le(code, 0, 4);
      };
      switch (info->shape) {
        case Shape::kNone: need(0); break;
        case Shape::kR: need(1); reg(ops[0]); break;
        case Shape::kRR: need(2); reg(ops[0]); reg(ops[1]); break;
        case Shape::kRRR: need(3); reg(ops[0]); reg(ops[1]); reg(ops[2]); break;
        case Shape::kRI:
          need(2);
          reg(ops[0]);
          put_le(code, static_cast<uint64_t>(eval(ops[1])), 8);
          break;
        case Shape::kRRI:
          need(3);
          reg(ops[0]);
          reg(ops[1]);
          put_le(code, static_cast<uint64_t>(eval(ops[2])), 8);
          break;
        case Shape::kRRM: {
          if (ops.size() == 2) ops.push_back("0");
          need(3);
          reg(ops[0]);
          reg(ops[1]);
          int64_t off = eval(ops[2]);
          if (off < INT32_MIN || off > INT32_MAX) fail("memory offset out of range");
          put_le(code, static_cast<uint64_t>(off), 4);
          break;
        }
        case Shape::kT: need(1); target(ops[0]); break;
        case Shape::kRT: need(2); reg(ops[0]); target(ops[1]); break;
        case Shape::kRRT: need(3); reg(ops[0]); reg(ops[1]); target(ops[2]); break;
        case Shape::kCall: {
          need(3);
          reg(ops[0]);
          auto it = func_index_.find(ops[1]);
          if (it == func_index_.end()) fail("call to unknown function " + ops[1]);
          put_le(code, it->second, 2);
          reg(ops[2]);
          break;
        }
        case Shape::kHost: {
          need(3);
          reg(ops[0]);
          auto it = import_index_.find(ops[1]);
          if (it == import_index_.end()) fail("host call to undeclared import " + ops[1]);
          put_le(code, it->second, 2);
          reg(ops[2]);
          break;
        }
      }
    }
    close_function();
  }

  static std::string rest(std::istringstream& ss) {
    std::string r;
    std::getline(ss, r);
    return trim(r);
  }

  uint8_t parse_reg(const std::string& s) const {
    if (s.size() < 2 || (s[0] != 'r' && s[0] != 'R')) fail("expected register, got '" + s + "'");
    int v = 0;
    for (size_t i = 1; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) fail("bad register " + s);
      v = v * 10 + (s[i] - '0');
      if (v > 254) fail("register out of range " + s);
    }
    return static_cast<uint8_t>(v);
  }

  int64_t term(const std::string& s) const {
    if (s.empty()) fail("missing value");
    if (s.size() == 3 && s[0] == '\'' && s[2] == '\'') return static_cast<unsigned char>(s[1]);
    if (std::isdigit(static_cast<unsigned char>(s[0]))) {
      try {
        size_t used = 0;
        uint64_t v = std::stoull(s, &used, 0);
        if (used != s.size()) fail("bad number " + s);
        return static_cast<int64_t>(v);
      } catch (const std::logic_error&) {
        fail("bad number " + s);
      }
    }
    auto it = symbols_.find(s);
    if (it == symbols_.end()) fail("unknown symbol " + s);
    return it->second;
  }

  // Sums of terms: 12, -4, BUF+8, 'a', END-START.
  int64_t eval(const std::string& expr) const {
    std::string e;
    for (char c : expr) {
      if (!std::isspace(static_cast<unsigned char>(c))) e.push_back(c);
    }
    if (e.empty()) fail("missing value");
    int64_t total = 0;
    size_t i = 0;
    int sign = 1;
    if (e[0] == '-') {
      sign = -1;
      i = 1;
    }
    while (i <= e.size()) {
      size_t j = i;
      if (j < e.size() && e[j] == '\'') j = std::min(e.size(), j + 3);
      while (j < e.size() && e[j] != '+' && e[j] != '-') ++j;
      total += sign * term(e.substr(i, j - i));
      if (j >= e.size()) break;
      sign = e[j] == '+' ? 1 : -1;
      i = j + 1;
    }
    return total;
  }

  void parse_data(const std::string& spec) {
    auto space = spec.find_first_of(" \t");
    if (space == std::string::npos) fail(".data needs an offset and a value");
    DataSegment seg;
    int64_t off = eval(spec.substr(0, space));
    if (off < 0 || off > UINT32_MAX) fail("data offset out of range");
    seg.offset = static_cast<uint32_t>(off);
    std::string value = trim(spec.substr(space));
    if (value.size() >= 3 && value[0] == 'x' && value[1] == '"' && value.back() == '"') {
      try {
        seg.bytes = from_hex(value.substr(2, value.size() - 3));
      } catch (const DecodeError& e) {
        fail(e.what());
      }
    } else if (value.size() >= 2 && value[0] == '"' && value.back() == '"') {
      for (size_t i = 1; i + 1 < value.size(); ++i) {
        char c = value[i];
        if (c == '\\' && i + 2 < value.size()) {
          char n = value[++i];
          switch (n) {
            case 'n': c = '\n'; break;
            case 't': c = '\t'; break;
            case '0': c = '\0'; break;
            case '\\': c = '\\'; break;
            case '"': c = '"'; break;
            default: fail(std::string("unknown escape \\") + n);
          }
        }
        seg.bytes.push_back(static_cast<uint8_t>(c));
      }
    } else {
      fail("data value must be \"text\" or x\"hex\"");
    }
    module_.data.push_back(std::move(seg));
  }

  std::vector<Line> lines_;
  int line_ = 0;
  RawModule module_;
  std::map<std::string, uint16_t> func_index_;
  std::map<std::string, uint16_t> import_index_;
  std::map<std::string, int64_t> symbols_;
};

}  // namespace

Bytes assemble(std::string_view source) { return Assembler(source).run(); }

}  // namespace dtrust::sandbox
