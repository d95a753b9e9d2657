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
#include "dtrust/auditor/descriptor.h"
#include "dtrust/canon/fileio.h"
#include "dtrust/node/client.h"
#include "dtrust/node/config.h"
#include "dtrust/node/release.h"

namespace dtrust::cli {

namespace {

struct DevArgs {
  std::string out, pub_out, key, kind = "sim-a", domain, code, roots, bundle, endpoint, release_out;
  std::string developer_pk, framework, release;
  std::vector<std::string> files, domains;
  uint64_t version = 0;
  unsigned threshold = 1;
  bool self = false;
};

int keygen(const DevArgs& a) {
  SigningKey k = SigningKey::generate();
  write_key_file(a.out, k.seed());
  if (!a.pub_out.empty()) write_key_file(a.pub_out, k.public_key().view());
  std::cout << k.public_key().hex() << "\n";
  return kExitOk;
}

int manufacturer(const DevArgs& a) {
  auto kind = attest::parse_backend_kind(a.kind);
  if (kind == attest::BackendKind::kNull) throw Error("the null backend has no manufacturer");
  SigningKey root = SigningKey::generate();
  write_key_file(a.out, root.seed());
  if (!a.roots.empty()) {
    attest::TrustRoots roots;
    if (std::filesystem::exists(a.roots)) roots = attest::TrustRoots::load(a.roots);
    roots.add(kind, root.public_key());
    write_file_atomic(a.roots, as_bytes(roots.serialize()));
  }
  std::cout << a.kind << " " << root.public_key().hex() << "\n";
  return kExitOk;
}

int provision(const DevArgs& a) {
  auto kind = attest::parse_backend_kind(a.kind);
  std::filesystem::path dir = std::filesystem::path(a.out) / "identity";
  std::filesystem::create_directories(dir);
  attest::BackendIdentity id;
  if (kind == attest::BackendKind::kNull) {
    id = attest::NullBackend(as_bytes(a.domain)).identity();
  } else {
    if (a.key.empty()) throw Error("--manufacturer-key is required for attested backends");
    attest::SimulatedManufacturer m(kind, read_signing_key(a.key));
    auto backend = attest::SimulatedBackend::provision(m, as_bytes(a.domain));
    write_key_file(dir / "attestation.key", backend.attestation_key().seed());
    id = backend.identity();
  }
  attest::save_identity(dir / "identity.bin", id);
  std::cout << to_hex(id.encode()) << "\n";
  return kExitOk;
}

Bytes load_code(const std::string& spec) {
  // "app:<name>" selects a built-in catalog app.
  if (spec.rfind("app:", 0) == 0) return apps::bundle(spec.substr(4)).code;
  return read_file(spec);
}

int sign_update(const DevArgs& a) {
  SigningKey dev = read_signing_key(a.key);
  node::UpdateBundle b = node::sign_update(dev, load_code(a.code), a.version);
  write_file_atomic(a.out, b.encode());
  auto rel = node::PublishedRelease::of(b);
  if (!a.release_out.empty()) write_file_atomic(a.release_out, rel.encode());
  std::cout << "[release]\napp_digest = \"" << rel.app_digest.hex() << "\"\nversion = " << rel.version
            << "\ndev_sig = \"" << rel.dev_sig.hex() << "\"\n";
  return kExitOk;
}

int push(const DevArgs& a) {
  node::UpdateBundle b = node::UpdateBundle::decode(read_file(a.bundle));
  node::TcpClient client(a.endpoint);
  tlog::SignedHead head = client.update(b);
  std::cout << "accepted: " << tlog::to_string(head.head) << "\n";
  return kExitOk;
}

int digest(const DevArgs& a) {
  if (a.self) std::cout << node::self_executable_digest().hex() << "  (this executable)\n";
  for (const auto& f : a.files) std::cout << sha256(load_code(f)).hex() << "  " << f << "\n";
  return kExitOk;
}

int descriptor(const DevArgs& a) {
  auditor::DeploymentDescriptor d;
  d.threshold = a.threshold;
  d.developer_pk = read_public_key(a.developer_pk);
  d.framework_digest = a.framework.empty() ? node::self_executable_digest() : Digest::from_hex(a.framework);
  if (!a.release.empty()) d.release = node::PublishedRelease::decode(read_file(a.release));
  if (!a.roots.empty()) d.trust_roots = attest::TrustRoots::load(a.roots);
  for (const std::string& spec : a.domains) {
    // id,endpoint,identity-file
    auto c1 = spec.find(',');
    auto c2 = spec.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw Error("--domain expects id,endpoint,identity-file");
    d.domains.push_back({spec.substr(0, c1), spec.substr(c1 + 1, c2 - c1 - 1),
                         attest::load_identity(spec.substr(c2 + 1))});
  }
  d.validate();
  std::string text = d.serialize(a.roots.empty() ? "" : std::filesystem::absolute(a.roots).string());
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(a.out, as_bytes(text));
  }
  return kExitOk;
}

}  // namespace

void register_dev(CLI::App& app, Action& action) {
  auto* dev = app.add_subcommand("dev", "Developer and operator tooling");
  dev->require_subcommand(1);
  auto a = std::make_shared<DevArgs>();
  auto bind = [&action, a](CLI::App* cmd, int (*fn)(const DevArgs&)) {
    cmd->callback([&action, a, fn] { action = [a, fn] { return fn(*a); }; });
  };

  auto* kg = dev->add_subcommand("keygen", "Generate a developer signing key");
  kg->add_option("--out", a->out, "Secret key file")->required();
  kg->add_option("--pub", a->pub_out, "Public key file");
  bind(kg, keygen);

  auto* mf = dev->add_subcommand("manufacturer", "Create a simulated manufacturer root key");
  mf->add_option("--kind", a->kind, "sim-a, sim-b or sim-c")->required();
  mf->add_option("--out", a->out, "Root key file")->required();
  mf->add_option("--trust-roots", a->roots, "Trust roots file to add the public key to");
  bind(mf, manufacturer);

  auto* pv = dev->add_subcommand("provision", "Provision a domain's backend identity into a data directory");
  pv->add_option("--kind", a->kind, "Backend kind")->required();
  pv->add_option("--domain", a->domain, "Domain id")->required();
  pv->add_option("--manufacturer-key", a->key, "Manufacturer root key file");
  pv->add_option("--data-dir", a->out, "Node data directory")->required();
  bind(pv, provision);

  auto* su = dev->add_subcommand("sign-update", "Sign code as an update bundle");
  su->add_option("--key", a->key, "Developer key file")->required();
  su->add_option("--code", a->code, "Bytecode file or app:<name>")->required();
  su->add_option("--version", a->version, "Version (>= 1)")->required();
  su->add_option("--out", a->out, "Bundle output file")->required();
  su->add_option("--release-out", a->release_out, "Write the published release record here");
  bind(su, sign_update);

  auto* ps = dev->add_subcommand("push", "Send an update bundle to a node");
  ps->add_option("--endpoint", a->endpoint, "host:port")->required();
  ps->add_option("--bundle", a->bundle, "Bundle file")->required();
  bind(ps, push);

  auto* dg = dev->add_subcommand("digest", "Print SHA-256 digests of code files");
  dg->add_option("files", a->files, "Files or app:<name>");
  dg->add_flag("--self", a->self, "Digest of this executable (the default framework digest)");
  bind(dg, digest);

  auto* ds = dev->add_subcommand("descriptor", "Write a deployment descriptor");
  ds->add_option("--threshold", a->threshold, "t")->required();
  ds->add_option("--developer-pk", a->developer_pk, "Developer public key file")->required();
  ds->add_option("--framework-digest", a->framework, "Hex digest (default: this executable)");
  ds->add_option("--release", a->release, "Published release record file");
  ds->add_option("--trust-roots", a->roots, "Trust roots file");
  ds->add_option("--domain", a->domains, "id,endpoint,identity-file (repeatable)")->required();
  ds->add_option("--out", a->out, "Output file (default stdout)");
  bind(ds, descriptor);
}

}  // namespace dtrust::cli
