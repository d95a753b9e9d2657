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

// What a client knows about a deployment before talking to it: the domains,
// their backend identities, the trust threshold, and the code it expects.
// Descriptors are TOML files distributed out of band.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtrust/attest/attestation.h"
#include "dtrust/node/release.h"

namespace dtrust::auditor {

class DescriptorError : public Error {
 public:
  using Error::Error;
};

struct DomainSpec {
  std::string domain_id;
  std::string endpoint;
  attest::BackendIdentity identity;
};

struct DeploymentDescriptor {
  std::vector<DomainSpec> domains;
  uint32_t threshold = 1;
  Digest framework_digest;
  PublicKey developer_pk;
  // The developer-signed release the domains should be running, if published.
  std::optional<node::PublishedRelease> release;
  attest::TrustRoots trust_roots;

  size_t n() const { return domains.size(); }
  const DomainSpec* find(std::string_view domain_id) const;

  // Throws DescriptorError unless n >= t >= 1, domain ids are unique and
  // match their identities, and the release (if any) verifies under
  // developer_pk.
  void validate() const;

  // Relative paths inside the text (trust_roots, developer_pk_file,
  // identity_file) resolve against base_dir.
  static DeploymentDescriptor parse(std::string_view toml, const std::filesystem::path& base_dir);
  static DeploymentDescriptor load(const std::filesystem::path& path);
  // Inline form: trust roots are written to the given file and referenced by
  // name; everything else is embedded.
  std::string serialize(const std::string& trust_roots_ref) const;
};

}  // namespace dtrust::auditor
