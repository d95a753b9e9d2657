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

// Sandbox applications shipped with the framework, as assembly sources.
//
//   echo         response = request
//   counter_v1   persistent counter; 'g' reads, anything else increments
//   counter_v2   same state, reports version 2
//   backup_v1    share backup service used by the secret-backup client
//   backup_v2    same protocol and state, reports version 2
//   faulty       traps, loops, or exhausts memory or stack on command
//   gf_bench     GF(2^8) share-evaluation benchmark workload

#include <string>
#include <string_view>
#include <vector>

#include "dtrust/sandbox/sandbox.h"

namespace dtrust::apps {

std::vector<std::string> names();

// Throws Error for unknown names.
std::string_view source(std::string_view name);

// Assembles the named app into a bundle.
sandbox::AppBundle bundle(std::string_view name);

}  // namespace dtrust::apps
