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

#include "dtrust/node/config.h"

#include <toml++/toml.hpp>

#include "dtrust/canon/fileio.h"

namespace dtrust::node {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
std::optional<T> get(const toml::table& t, std::string_view key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  auto v = n->value<T>();
  if (!v) throw ConfigError("config key '" + std::string(key) + "' has the wrong type");
  return v;
}

uint64_t get_positive(const toml::table& t, std::string_view key, uint64_t fallback) {
  auto v = get<int64_t>(t, key);
  if (!v) return fallback;
  if (*v <= 0) throw ConfigError("config key '" + std::string(key) + "' must be positive");
  return static_cast<uint64_t>(*v);
}

}  // namespace

NodeConfig NodeConfig::parse(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + std::string(e.description()));
  }

  NodeConfig c;
  try {
    auto id = get<std::string>(root, "domain_id");
    if (!id || id->empty()) throw ConfigError("config requires domain_id");
    c.domain_id = *id;
    if (auto v = get<std::string>(root, "listen")) c.listen = *v;
    if (auto v = get<std::string>(root, "backend")) c.backend = attest::parse_backend_kind(*v);

    auto pk_hex = get<std::string>(root, "developer_pk");
    auto pk_file = get<std::string>(root, "developer_pk_file");
    if (pk_hex && pk_file) throw ConfigError("set only one of developer_pk, developer_pk_file");
    if (pk_hex) {
      c.developer_pk = PublicKey::from_hex(*pk_hex);
    } else if (pk_file) {
      c.developer_pk = read_public_key(resolve(base_dir, *pk_file));
    } else {
      throw ConfigError("config requires developer_pk or developer_pk_file");
    }

    if (auto v = get<std::string>(root, "framework_digest")) {
      c.framework_digest = Digest::from_hex(*v);
    } else {
      c.framework_digest = self_executable_digest();
    }

    if (auto v = get<std::string>(root, "data_dir")) c.data_dir = resolve(base_dir, *v);
    if (auto v = get<std::string>(root, "identity_file")) c.identity_file = resolve(base_dir, *v);
    if (auto v = get<std::string>(root, "attestation_key_file")) {
      c.attestation_key_file = resolve(base_dir, *v);
    }
    if (auto v = get<std::string>(root, "aot_cache_dir")) {
      c.aot_cache_dir = resolve(base_dir, *v).string();
    }
    if (auto v = get<std::string>(root, "engine")) {
      c.engine = sandbox::parse_engine(*v);
    } else {
      c.engine = sandbox::aot_available() ? sandbox::Engine::kAot : sandbox::Engine::kInterpreter;
    }

    if (const toml::table* limits = root["limits"].as_table()) {
      c.limits.max_memory_bytes = get_positive(*limits, "max_memory_bytes", c.limits.max_memory_bytes);
      c.limits.max_millis_per_request =
          get_positive(*limits, "max_millis_per_request", c.limits.max_millis_per_request);
      c.limits.max_key_bytes = get_positive(*limits, "max_key_bytes", c.limits.max_key_bytes);
      c.limits.max_value_bytes = get_positive(*limits, "max_value_bytes", c.limits.max_value_bytes);
      c.limits.max_response_bytes =
          get_positive(*limits, "max_response_bytes", c.limits.max_response_bytes);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (c.backend != attest::BackendKind::kNull && c.identity_path().empty()) {
    throw ConfigError("attested backends need data_dir or identity_file");
  }
  return c;
}

NodeConfig NodeConfig::load(const std::filesystem::path& path) {
  Bytes text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse(dtrust::to_string(text), path.parent_path());
}

std::filesystem::path NodeConfig::identity_path() const {
  if (!identity_file.empty()) return identity_file;
  if (data_dir.empty()) return {};
  return data_dir / "identity" / "identity.bin";
}

std::filesystem::path NodeConfig::attestation_key_path() const {
  if (!attestation_key_file.empty()) return attestation_key_file;
  if (data_dir.empty()) return {};
  return data_dir / "identity" / "attestation.key";
}

Digest self_executable_digest() {
  return sha256(read_file("/proc/self/exe"));
}

}  // namespace dtrust::node
