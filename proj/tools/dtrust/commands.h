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

#include <CLI11.hpp>
#include <functional>

namespace dtrust::cli {

// Each register_* function adds a subcommand tree and sets `action` to the
// handler of whichever leaf the user selects. Handlers return the exit code.
using Action = std::function<int()>;

void register_node(CLI::App& app, Action& action);
void register_dev(CLI::App& app, Action& action);
void register_audit(CLI::App& app, Action& action);
void register_backup(CLI::App& app, Action& action);
void register_misc(CLI::App& app, Action& action);

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;   // audit fail, invalid proof, gate miss
inline constexpr int kExitUsage = 2;    // bad config, descriptor, or arguments
inline constexpr int kExitState = 3;    // node state verification failure

}  // namespace dtrust::cli
