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

#include <atomic>
#include <condition_variable>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "dtrust/node/node.h"

namespace dtrust::node {

// Serves the wire protocol over TCP, one thread per connection.
class TcpServer {
 public:
  // Binds immediately ("host:port"; port 0 picks a free port). Throws Error.
  TcpServer(Node& node, const std::string& listen);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  void start();
  // Stops accepting, closes connections, joins all threads.
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

  uint16_t port() const { return port_; }
  std::string endpoint() const { return host_ + ":" + std::to_string(port_); }

 private:
  void accept_loop();
  void serve(int fd);

  Node& node_;
  std::string host_;
  uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::condition_variable idle_;
  size_t active_ = 0;
  std::list<int> conns_;
};

// Splits "host:port"; throws Error.
std::pair<std::string, uint16_t> split_endpoint(const std::string& endpoint);

}  // namespace dtrust::node
