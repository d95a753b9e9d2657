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
#include "dtrust/auditor/descriptor.h"
#include "dtrust/node/config.h"
#include "dtrust/node/node.h"

int main(int argc, char** argv) {
  CLI::App app{"dtrust: distributed-trust deployment node, auditor and tools"};
  app.require_subcommand(1);
  dtrust::cli::Action action;
  dtrust::cli::register_node(app, action);
  dtrust::cli::register_dev(app, action);
  dtrust::cli::register_audit(app, action);
  dtrust::cli::register_backup(app, action);
  dtrust::cli::register_misc(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : dtrust::cli::kExitUsage;
  }
  try {
    return action ? action() : dtrust::cli::kExitUsage;
  } catch (const dtrust::node::StateVerificationFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dtrust::cli::kExitState;
  } catch (const dtrust::node::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dtrust::cli::kExitUsage;
  } catch (const dtrust::auditor::DescriptorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dtrust::cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dtrust::cli::kExitFailed;
  }
}
