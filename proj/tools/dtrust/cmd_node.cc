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

#include <csignal>
#include <iostream>

#include "commands.h"
#include "dtrust/node/config.h"
#include "dtrust/node/node.h"
#include "dtrust/node/server.h"

namespace dtrust::cli {

namespace {

int serve(const std::string& config_path) {
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop;
  sigemptyset(&stop);
  sigaddset(&stop, SIGINT);
  sigaddset(&stop, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop, nullptr);

  node::NodeConfig config = node::NodeConfig::load(config_path);
  auto n = node::Node::open(config);
  node::TcpServer server(*n, config.listen);
  server.start();
  auto head = n->signed_head();
  std::cout << "domain " << config.domain_id << " (" << attest::to_string(config.backend) << ") listening on "
            << server.endpoint() << ", log " << tlog::to_string(head.head) << ", engine "
            << sandbox::to_string(config.engine) << std::endl;

  int sig = 0;
  sigwait(&stop, &sig);
  std::cout << "stopping on signal " << sig << std::endl;
  server.stop();
  return kExitOk;
}

}  // namespace

void register_node(CLI::App& app, Action& action) {
  auto* node = app.add_subcommand("node", "Run a trust-domain node");
  node->require_subcommand(1);
  auto* serve_cmd = node->add_subcommand("serve", "Serve status, update and app requests over TCP");
  auto config = std::make_shared<std::string>();
  serve_cmd->add_option("--config", *config, "Node config file (TOML)")->required();
  serve_cmd->callback([&action, config] { action = [config] { return serve(*config); }; });
}

}  // namespace dtrust::cli
