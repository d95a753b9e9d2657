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

#include <filesystem>
#include <string>

#include "dtrust/attest/attestation.h"
#include "dtrust/sandbox/sandbox.h"

namespace dtrust::node {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Node settings, normally read from a TOML file:
//
//   domain_id = "domain-1"
//   listen = "127.0.0.1:7401"
//   backend = "sim-a"                  # sim-a | sim-b | sim-c | null
//   developer_pk = "<hex>"             # or developer_pk_file = "dev.pub"
//   framework_digest = "<hex>"         # omitted: hash of the running executable
//   data_dir = "/var/lib/dtrust/d1"
//   engine = "aot"                     # aot | interpreter (default: aot if available)
//   identity_file = "..."              # default: <data_dir>/identity/identity.bin
//   attestation_key_file = "..."       # default: <data_dir>/identity/attestation.key
//
//   [limits]
//   max_memory_bytes = 67108864
//   max_millis_per_request = 5000
//
// Relative paths resolve against the config file's directory.
struct NodeConfig {
  std::string domain_id;
  std::string listen = "127.0.0.1:0";
  attest::BackendKind backend = attest::BackendKind::kNull;
  PublicKey developer_pk;
  Digest framework_digest;
  sandbox::SandboxLimits limits;
  sandbox::Engine engine = sandbox::Engine::kInterpreter;
  // Empty: everything lives in memory (tests).
  std::filesystem::path data_dir;
  std::filesystem::path identity_file;
  std::filesystem::path attestation_key_file;
  std::string aot_cache_dir;

  // Throws ConfigError.
  static NodeConfig parse(std::string_view toml_text, const std::filesystem::path& base_dir);
  static NodeConfig load(const std::filesystem::path& path);

  std::filesystem::path identity_path() const;
  std::filesystem::path attestation_key_path() const;
};

// SHA-256 of /proc/self/exe.
Digest self_executable_digest();

}  // namespace dtrust::node
