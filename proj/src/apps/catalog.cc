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

#include "dtrust/apps/catalog.h"

#include "catalog_data.h"
#include "dtrust/sandbox/assembler.h"

namespace dtrust::apps {

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (size_t i = 0; i < detail::kSourceCount; ++i) out.emplace_back(detail::kSources[i].name);
  return out;
}

std::string_view source(std::string_view name) {
  for (size_t i = 0; i < detail::kSourceCount; ++i) {
    if (name == detail::kSources[i].name) return detail::kSources[i].text;
  }
  throw Error("unknown app: " + std::string(name));
}

sandbox::AppBundle bundle(std::string_view name) {
  return sandbox::AppBundle::from_code(sandbox::assemble(source(name)));
}

}  // namespace dtrust::apps
