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
#include "dtrust/auditor/report_json.h"
#include "dtrust/canon/fileio.h"
#include "dtrust/demoapp/backup.h"

namespace dtrust::cli {

namespace {

struct BackupArgs {
  std::string descriptor, pins, secret_file, backup_id, records = ".dtrust-backups", out;
  int timeout_ms = 10000;
};

demoapp::BackupClient make_client(const BackupArgs& a) {
  auditor::AuditOptions o;
  o.connect = auditor::tcp_connector(std::chrono::milliseconds(a.timeout_ms));
  auto pins = a.pins.empty() ? auditor::PinStore{} : auditor::PinStore::load(a.pins);
  return demoapp::BackupClient(auditor::DeploymentDescriptor::load(a.descriptor), o, std::move(pins));
}

int put(const BackupArgs& a) {
  auto client = make_client(a);
  Bytes secret = read_file(a.secret_file);
  demoapp::SystemRandom rng;
  try {
    auto r = client.put(a.backup_id, secret, rng);
    r.record.save(a.records);
    if (!a.pins.empty()) client.pins().save(a.pins);
    std::cout << "stored " << r.stored << " of " << r.outcomes.size() << " shares (threshold "
              << r.record.threshold << ")\n";
    for (const auto& [id, o] : r.outcomes) {
      std::cout << "  " << id << " " << (o.error.empty() ? demoapp::backup_protocol::to_string(o.status) : o.error)
                << "\n";
    }
    return kExitOk;
  } catch (const demoapp::AuditRefused& e) {
    std::cerr << e.what() << "\n" << auditor::report_text(e.report());
    return kExitFailed;
  }
}

int recover(const BackupArgs& a) {
  auto client = make_client(a);
  auto record = demoapp::BackupRecord::load(a.records, a.backup_id);
  Bytes secret = client.recover(record);
  if (a.out.empty()) {
    std::cout << to_hex(secret) << "\n";
  } else {
    write_file_atomic(a.out, secret);
    std::cout << "recovered " << secret.size() << " bytes to " << a.out << "\n";
  }
  return kExitOk;
}

int remove(const BackupArgs& a) {
  auto client = make_client(a);
  auto record = demoapp::BackupRecord::load(a.records, a.backup_id);
  for (const auto& [id, o] : client.remove(record)) {
    std::cout << "  " << id << " " << (o.error.empty() ? demoapp::backup_protocol::to_string(o.status) : o.error)
              << "\n";
  }
  return kExitOk;
}

}  // namespace

void register_backup(CLI::App& app, Action& action) {
  auto* backup = app.add_subcommand("backup", "t-of-n secret backup client");
  backup->require_subcommand(1);
  auto a = std::make_shared<BackupArgs>();
  auto common = [a](CLI::App* cmd) {
    cmd->add_option("--descriptor", a->descriptor, "Deployment descriptor (TOML)")->required();
    cmd->add_option("--backup-id", a->backup_id, "Backup identifier")->required();
    cmd->add_option("--records", a->records, "Directory of local backup records");
    cmd->add_option("--pins", a->pins, "Pin store file");
    cmd->add_option("--timeout-ms", a->timeout_ms, "Per-domain timeout");
  };
  auto bind = [&action, a](CLI::App* cmd, int (*fn)(const BackupArgs&)) {
    cmd->callback([&action, a, fn] { action = [a, fn] { return fn(*a); }; });
  };

  auto* p = backup->add_subcommand("put", "Audit, split and deposit a secret");
  common(p);
  p->add_option("--secret-file", a->secret_file, "File holding the secret")->required();
  bind(p, put);

  auto* r = backup->add_subcommand("recover", "Fetch shares and reconstruct the secret");
  common(r);
  r->add_option("--out", a->out, "Write the secret here instead of printing hex");
  bind(r, recover);

  auto* d = backup->add_subcommand("delete", "Delete every share of a backup");
  common(d);
  bind(d, remove);
}

}  // namespace dtrust::cli
