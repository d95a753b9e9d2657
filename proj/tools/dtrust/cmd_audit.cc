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
#include "dtrust/auditor/auditor.h"
#include "dtrust/auditor/report_json.h"
#include "dtrust/canon/fileio.h"

namespace dtrust::cli {

namespace {

struct AuditArgs {
  std::string descriptor, pins, peer_pins, proof_dir, proof, roots, developer_pk;
  bool json = false;
  bool dry_run = false;
  int timeout_ms = 10000;
};

auditor::AuditOptions options(const AuditArgs& a) {
  auditor::AuditOptions o;
  o.connect = auditor::tcp_connector(std::chrono::milliseconds(a.timeout_ms));
  return o;
}

void write_proofs(const AuditArgs& a, const std::vector<auditor::MisbehaviorProof>& proofs) {
  if (a.proof_dir.empty() || proofs.empty()) return;
  std::filesystem::create_directories(a.proof_dir);
  for (size_t i = 0; i < proofs.size(); ++i) {
    auto path = std::filesystem::path(a.proof_dir) /
                (proofs[i].domain_id() + "-" + to_string(proofs[i].kind()) + "-" + std::to_string(i) + ".bin");
    write_file_atomic(path, proofs[i].encode());
    std::cerr << "wrote " << path.string() << "\n";
  }
}

int run(const AuditArgs& a) {
  auto d = auditor::DeploymentDescriptor::load(a.descriptor);
  auto pins = a.pins.empty() ? auditor::PinStore{} : auditor::PinStore::load(a.pins);
  auto out = auditor::audit(d, pins, options(a));
  std::cout << (a.json ? auditor::report_json(out.report) + "\n" : auditor::report_text(out.report));
  if (!a.pins.empty() && !a.dry_run) out.pins.save(a.pins);
  write_proofs(a, out.report.proofs);
  return out.report.pass ? kExitOk : kExitFailed;
}

int check_update(const AuditArgs& a) {
  auto d = auditor::DeploymentDescriptor::load(a.descriptor);
  auto pins = auditor::PinStore::load(a.pins);
  if (pins.empty()) throw Error("no pins at " + a.pins + "; run `audit run` first");
  auto c = auditor::check_update(d, pins, options(a));
  if (a.json) {
    std::cout << auditor::update_check_json(c) << "\n";
  } else {
    std::cout << to_string(c.kind);
    if (c.new_digest) std::cout << ": " << c.new_digest->hex() << " version " << *c.new_version;
    std::cout << "\n";
    for (const auto& [id, adoption] : c.adoption) std::cout << "  " << id << " " << to_string(adoption) << "\n";
    for (const auto& id : c.inconsistent) std::cout << "  inconsistent: " << id << "\n";
  }
  if (!a.dry_run) c.pins.save(a.pins);
  write_proofs(a, c.proofs);
  return c.kind == auditor::UpdateCheck::Kind::kInconsistent ? kExitFailed : kExitOk;
}

int verify_proof(const AuditArgs& a) {
  attest::TrustRoots roots;
  PublicKey dev;
  if (!a.descriptor.empty()) {
    auto d = auditor::DeploymentDescriptor::load(a.descriptor);
    roots = d.trust_roots;
    dev = d.developer_pk;
  }
  if (!a.roots.empty()) roots = attest::TrustRoots::load(a.roots);
  if (!a.developer_pk.empty()) dev = read_public_key(a.developer_pk);
  if (roots.size() == 0) throw Error("no trust roots: pass --trust-roots or --descriptor");

  auditor::MisbehaviorProof proof;
  try {
    proof = auditor::MisbehaviorProof::decode(read_file(a.proof));
  } catch (const DecodeError& e) {
    std::cout << "INVALID: malformed proof: " << e.what() << "\n";
    return kExitFailed;
  }
  std::string why = auditor::check_misbehavior(proof, roots, dev);
  if (!why.empty()) {
    std::cout << "INVALID: " << why << "\n";
    return kExitFailed;
  }
  std::cout << "VALID: " << to_string(proof.kind()) << " by " << proof.domain_id() << " ("
            << attest::to_string(proof.identity.kind) << ")\n";
  return kExitOk;
}

int exchange(const AuditArgs& a) {
  auto d = auditor::DeploymentDescriptor::load(a.descriptor);
  auto proofs = auditor::cross_check_pins(d, auditor::PinStore::load(a.pins), auditor::PinStore::load(a.peer_pins));
  std::cout << proofs.size() << " equivocation proof(s)\n";
  write_proofs(a, proofs);
  return proofs.empty() ? kExitOk : kExitFailed;
}

}  // namespace

void register_audit(CLI::App& app, Action& action) {
  auto* audit = app.add_subcommand("audit", "Audit a deployment and verify misbehavior proofs");
  audit->require_subcommand(1);
  auto a = std::make_shared<AuditArgs>();
  auto bind = [&action, a](CLI::App* cmd, int (*fn)(const AuditArgs&)) {
    cmd->callback([&action, a, fn] { action = [a, fn] { return fn(*a); }; });
  };

  auto* run_cmd = audit->add_subcommand("run", "Query every domain and evaluate the trust policy");
  run_cmd->add_option("--descriptor", a->descriptor, "Deployment descriptor (TOML)")->required();
  run_cmd->add_option("--pins", a->pins, "Pin store file, created if missing");
  run_cmd->add_flag("--json", a->json, "Print the JSON report");
  run_cmd->add_flag("--dry-run", a->dry_run, "Do not update the pin store");
  run_cmd->add_option("--proof-dir", a->proof_dir, "Write misbehavior proofs here");
  run_cmd->add_option("--timeout-ms", a->timeout_ms, "Per-domain timeout");
  bind(run_cmd, run);

  auto* cu = audit->add_subcommand("check-update", "Report code updates since the pinned heads");
  cu->add_option("--descriptor", a->descriptor, "Deployment descriptor (TOML)")->required();
  cu->add_option("--pins", a->pins, "Pin store file")->required();
  cu->add_flag("--json", a->json, "Print JSON");
  cu->add_flag("--dry-run", a->dry_run, "Do not update the pin store");
  cu->add_option("--proof-dir", a->proof_dir, "Write misbehavior proofs here");
  cu->add_option("--timeout-ms", a->timeout_ms, "Per-domain timeout");
  bind(cu, check_update);

  auto* vp = audit->add_subcommand("verify-proof", "Verify a misbehavior proof offline");
  vp->add_option("proof", a->proof, "Proof file")->required();
  vp->add_option("--trust-roots", a->roots, "Trust roots file");
  vp->add_option("--developer-pk", a->developer_pk, "Developer public key file");
  vp->add_option("--descriptor", a->descriptor, "Take roots and developer key from a descriptor");
  bind(vp, verify_proof);

  auto* ex = audit->add_subcommand("exchange", "Compare pins with another auditor's pins");
  ex->add_option("--descriptor", a->descriptor, "Deployment descriptor (TOML)")->required();
  ex->add_option("--pins", a->pins, "Own pin store")->required();
  ex->add_option("--peer-pins", a->peer_pins, "Peer pin store")->required();
  ex->add_option("--proof-dir", a->proof_dir, "Write equivocation proofs here");
  bind(ex, exchange);
}

}  // namespace dtrust::cli
