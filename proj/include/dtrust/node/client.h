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

#include <chrono>
#include <memory>
#include <string>

#include "dtrust/node/node.h"
#include "dtrust/canon/encoding.h"
#include "dtrust/node/wire.h"

namespace dtrust::node {

// Transport-level failure: connection refused, timeout, malformed frame.
class Unreachable : public Error {
 public:
  using Error::Error;
};

// A remote error reported by the node other than UpdateRejected.
class RemoteError : public Error {
 public:
  RemoteError(wire::ErrorCode code, const std::string& detail)
      : Error("remote error: " + detail), code_(code) {}
  wire::ErrorCode code() const { return code_; }

 private:
  wire::ErrorCode code_;
};

// Client view of one trust domain. Methods throw Unreachable, RemoteError,
// and for update() UpdateRejected.
class DomainClient {
 public:
  virtual ~DomainClient() = default;

  virtual StatusResponse status(ByteView nonce, std::optional<uint64_t> known_seq) = 0;
  virtual tlog::SignedHead update(const UpdateBundle& bundle) = 0;
  virtual AppResult app_request(ByteView payload) = 0;
  virtual wire::IdentityResponse identity() = 0;
};

// Sends encoded requests and decodes responses; subclasses move the bytes.
class FramedClient : public DomainClient {
 public:
  StatusResponse status(ByteView nonce, std::optional<uint64_t> known_seq) override;
  tlog::SignedHead update(const UpdateBundle& bundle) override;
  AppResult app_request(ByteView payload) override;
  wire::IdentityResponse identity() override;

 protected:
  virtual Bytes round_trip(ByteView request) = 0;

 private:
  Bytes call(ByteView request, Tag expected);
};

// In-process client that still goes through the wire encoding.
class LocalClient : public FramedClient {
 public:
  explicit LocalClient(Node& node) : node_(node) {}

 protected:
  Bytes round_trip(ByteView request) override { return wire::dispatch(node_, request); }

 private:
  Node& node_;
};

// One TCP connection per call to "host:port".
class TcpClient : public FramedClient {
 public:
  explicit TcpClient(std::string endpoint,
                     std::chrono::milliseconds timeout = std::chrono::seconds(30));

  const std::string& endpoint() const { return endpoint_; }

 protected:
  Bytes round_trip(ByteView request) override;

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

}  // namespace dtrust::node
