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

#include "dtrust/auditor/descriptor.h"

#include <set>
#include <sstream>
#include <toml++/toml.hpp>

#include "dtrust/canon/fileio.h"

namespace dtrust::auditor {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? base / path : path;
}

template <typename View>
std::string required_string(const View& node, const std::string& what) {
  auto v = node.template value<std::string>();
  if (!v) throw DescriptorError("missing or non-string field: " + what);
  return *v;
}

template <typename T, typename F>
T parse_field(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const DescriptorError&) {
    throw;
  } catch (const std::exception& e) {
    throw DescriptorError(what + ": " + e.what());
  }
}

}  // namespace

const DomainSpec* DeploymentDescriptor::find(std::string_view domain_id) const {
  for (const DomainSpec& d : domains) {
    if (d.domain_id == domain_id) return &d;
  }
  return nullptr;
}

void DeploymentDescriptor::validate() const {
  if (domains.empty()) throw DescriptorError("descriptor lists no domains");
  if (threshold < 1 || threshold > domains.size()) {
    throw DescriptorError("threshold " + std::to_string(threshold) + " outside 1.." +
                          std::to_string(domains.size()));
  }
  std::set<std::string> seen;
  for (const DomainSpec& d : domains) {
    if (d.domain_id.empty()) throw DescriptorError("empty domain id");
    if (!seen.insert(d.domain_id).second) throw DescriptorError("duplicate domain id " + d.domain_id);
    if (dtrust::to_string(d.identity.domain_id) != d.domain_id) {
      throw DescriptorError("identity for " + d.domain_id + " names another domain");
    }
  }
  if (release && !node::verify_release(developer_pk, *release)) {
    throw DescriptorError("published release signature does not verify under developer_pk");
  }
}

DeploymentDescriptor DeploymentDescriptor::parse(std::string_view text,
                                                 const std::filesystem::path& base_dir) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw DescriptorError(std::string("descriptor: ") + std::string(e.description()));
  }

  DeploymentDescriptor d;
  auto t = tbl["threshold"].value<int64_t>();
  if (!t || *t < 1) throw DescriptorError("threshold must be a positive integer");
  d.threshold = static_cast<uint32_t>(*t);

  d.framework_digest = parse_field<Digest>("framework_digest", [&] {
    return Digest::from_hex(required_string(tbl["framework_digest"], "framework_digest"));
  });
  d.developer_pk = parse_field<PublicKey>("developer_pk", [&] {
    if (auto file = tbl["developer_pk_file"].value<std::string>()) {
      return read_public_key(resolve(base_dir, *file));
    }
    return PublicKey::from_hex(required_string(tbl["developer_pk"], "developer_pk"));
  });
  if (auto roots = tbl["trust_roots"].value<std::string>()) {
    d.trust_roots = parse_field<attest::TrustRoots>(
        "trust_roots", [&] { return attest::TrustRoots::load(resolve(base_dir, *roots)); });
  }

  if (auto* rel = tbl["release"].as_table()) {
    d.release = parse_field<node::PublishedRelease>("release", [&] {
      node::PublishedRelease r;
      r.app_digest = Digest::from_hex(required_string((*rel)["app_digest"], "release.app_digest"));
      auto v = (*rel)["version"].value<int64_t>();
      if (!v || *v < 1) throw DescriptorError("release.version must be a positive integer");
      r.version = static_cast<uint64_t>(*v);
      r.dev_sig = Signature::from_hex(required_string((*rel)["dev_sig"], "release.dev_sig"));
      return r;
    });
  }

  auto* arr = tbl["domain"].as_array();
  if (!arr) throw DescriptorError("descriptor needs at least one [[domain]]");
  for (const toml::node& n : *arr) {
    const toml::table* dt = n.as_table();
    if (!dt) throw DescriptorError("[[domain]] entries must be tables");
    toml::node_view<const toml::node> view(dt);
    DomainSpec spec;
    spec.domain_id = required_string(view["id"], "domain.id");
    spec.endpoint = view["endpoint"].value_or(std::string());
    spec.identity = parse_field<attest::BackendIdentity>("domain " + spec.domain_id, [&] {
      if (auto file = view["identity_file"].value<std::string>()) {
        return attest::load_identity(resolve(base_dir, *file));
      }
      return attest::BackendIdentity::decode(from_hex(required_string(view["identity"], "domain.identity")));
    });
    if (auto backend = view["backend"].value<std::string>()) {
      auto kind = parse_field<attest::BackendKind>(
          "domain " + spec.domain_id, [&] { return attest::parse_backend_kind(*backend); });
      if (kind != spec.identity.kind) {
        throw DescriptorError("domain " + spec.domain_id + ": backend does not match identity");
      }
    }
    d.domains.push_back(std::move(spec));
  }
  d.validate();
  return d;
}

DeploymentDescriptor DeploymentDescriptor::load(const std::filesystem::path& path) {
  Bytes text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw DescriptorError(e.what());
  }
  return parse(dtrust::to_string(text), path.parent_path());
}

std::string DeploymentDescriptor::serialize(const std::string& trust_roots_ref) const {
  std::ostringstream out;
  out << "threshold = " << threshold << "\n";
  out << "framework_digest = \"" << framework_digest.hex() << "\"\n";
  out << "developer_pk = \"" << developer_pk.hex() << "\"\n";
  if (!trust_roots_ref.empty()) out << "trust_roots = \"" << trust_roots_ref << "\"\n";
  if (release) {
    out << "\n[release]\n";
    out << "app_digest = \"" << release->app_digest.hex() << "\"\n";
    out << "version = " << release->version << "\n";
    out << "dev_sig = \"" << release->dev_sig.hex() << "\"\n";
  }
  for (const DomainSpec& d : domains) {
    out << "\n[[domain]]\n";
    out << "id = \"" << d.domain_id << "\"\n";
    out << "endpoint = \"" << d.endpoint << "\"\n";
    out << "backend = \"" << attest::to_string(d.identity.kind) << "\"\n";
    out << "identity = \"" << to_hex(d.identity.encode()) << "\"\n";
  }
  return out.str();
}

}  // namespace dtrust::auditor
