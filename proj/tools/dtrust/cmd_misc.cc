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

#include <iostream>

#include "commands.h"
#include "dtrust/apps/catalog.h"
#include "dtrust/bench/bench.h"
#include "dtrust/canon/fileio.h"
#include "dtrust/node/client.h"
#include "dtrust/sandbox/assembler.h"

namespace dtrust::cli {

namespace {

struct MiscArgs {
  std::string in, out, endpoint, payload, payload_hex;
  size_t iterations = 1000;
  uint32_t rounds = 16;
  bool json = false, list = false, no_interp = false, no_node = false;
};

int assemble(const MiscArgs& a) {
  if (a.list) {
    for (const auto& name : apps::names()) std::cout << name << "\n";
    return kExitOk;
  }
  if (a.in.empty() || a.out.empty()) throw Error("asm needs an input file and -o");
  std::string src = a.in.rfind("app:", 0) == 0 ? std::string(apps::source(a.in.substr(4)))
                                                : dtrust::to_string(read_file(a.in));
  Bytes code = sandbox::assemble(src);
  write_file_atomic(a.out, code);
  std::cout << sha256(code).hex() << "  " << a.out << " (" << code.size() << " bytes)\n";
  return kExitOk;
}

int bench(const MiscArgs& a) {
  bench::BenchOptions o;
  o.iterations = a.iterations;
  o.interpreter = !a.no_interp;
  o.node = !a.no_node;
  auto rep = bench::run_bench(bench::gf_share_workload(a.rounds), o);
  std::cout << (a.json ? bench::bench_json(rep) + "\n" : bench::bench_table(rep));
  return rep.pass ? kExitOk : kExitFailed;
}

int status(const MiscArgs& a) {
  node::TcpClient client(a.endpoint);
  auto id = client.identity();
  auto nonce = attest::random_nonce();
  auto s = client.status(nonce, std::nullopt);
  std::cout << "domain:     " << dtrust::to_string(id.identity.domain_id) << " ("
            << attest::to_string(id.identity.kind) << ")\n"
            << "framework:  " << s.doc.framework_digest.hex() << "\n"
            << "app:        " << s.doc.app_digest.hex() << "\n"
            << "log:        " << tlog::to_string(s.doc.log_head) << "\n"
            << "identity:   " << to_hex(id.identity.encode()) << "\n";
  return kExitOk;
}

int call(const MiscArgs& a) {
  node::TcpClient client(a.endpoint);
  Bytes payload = a.payload_hex.empty() ? to_bytes(a.payload) : from_hex(a.payload_hex);
  auto r = client.app_request(payload);
  std::cout << "status: " << static_cast<int>(r.status) << (r.error.empty() ? "" : " (" + r.error + ")") << "\n"
            << "head:   " << tlog::to_string(r.head.head) << "\n"
            << "output: " << to_hex(r.output) << "\n";
  return r.status == node::AppStatus::kOk ? kExitOk : kExitFailed;
}

}  // namespace

void register_misc(CLI::App& app, Action& action) {
  auto a = std::make_shared<MiscArgs>();
  auto bind = [&action, a](CLI::App* cmd, int (*fn)(const MiscArgs&)) {
    cmd->callback([&action, a, fn] { action = [a, fn] { return fn(*a); }; });
  };

  auto* as = app.add_subcommand("asm", "Assemble .dtasm source into a bytecode bundle");
  as->add_option("input", a->in, "Source file or app:<name>");
  as->add_option("-o,--out", a->out, "Output bytecode file");
  as->add_flag("--list", a->list, "List built-in apps");
  bind(as, assemble);

  auto* bn = app.add_subcommand("bench", "Native vs sandbox latency on the GF(2^8) workload");
  bn->add_option("--iterations", a->iterations, "Timed iterations per environment (>= 1000 for the gate)");
  bn->add_option("--rounds", a->rounds, "Workload rounds per request");
  bn->add_flag("--json", a->json, "Print JSON");
  bn->add_flag("--no-interpreter", a->no_interp, "Skip the interpreter row");
  bn->add_flag("--no-node", a->no_node, "Skip the node request-path row");
  bind(bn, bench);

  auto* st = app.add_subcommand("status", "Show a node's attested status");
  st->add_option("--endpoint", a->endpoint, "host:port")->required();
  bind(st, status);

  auto* cl = app.add_subcommand("call", "Send an app request to a node");
  cl->add_option("--endpoint", a->endpoint, "host:port")->required();
  cl->add_option("--payload", a->payload, "Payload as text");
  cl->add_option("--payload-hex", a->payload_hex, "Payload as hex");
  bind(cl, call);
}

}  // namespace dtrust::cli
