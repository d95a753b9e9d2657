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

// Node wire protocol. Each message is a frame: an 8-byte big-endian length
// followed by one canonically encoded payload whose tag names the message.
//
//   StatusRequest    [nonce, has_known_seq, known_seq]
//   StatusResponse   [doc, head, has_delta, delta entries (list), has_anchor, anchor]
//   UpdateRequest    [code, version, dev_sig]
//   UpdateResponse   [head]
//   AppRequest       [payload]
//   AppResponse      [status, output, error, head]
//   IdentityRequest  []
//   IdentityResponse [identity, framework_digest]
//   ErrorResponse    [code, detail]
//
// Nested objects (doc, head, entries, identity) are embedded as byte strings
// holding their own canonical encodings.

#include <optional>

#include "dtrust/node/node.h"

namespace dtrust::node::wire {

inline constexpr uint64_t kMaxFrameBytes = 64ull << 20;

enum class ErrorCode : uint8_t {
  kBadRequest = 1,
  kUpdateRejected = 2,
  kInternal = 3,
};

struct StatusRequest {
  Bytes nonce;
  std::optional<uint64_t> known_seq;
};

struct ErrorResponse {
  ErrorCode code = ErrorCode::kInternal;
  // For kUpdateRejected: the UpdateRejected::Reason.
  uint8_t subcode = 0;
  std::string detail;
};

struct IdentityResponse {
  attest::BackendIdentity identity;
  Digest framework_digest;
};

Bytes encode(const StatusRequest& m);
Bytes encode(const StatusResponse& m);
Bytes encode(const UpdateBundle& m);
Bytes encode_update_response(const tlog::SignedHead& head);
Bytes encode_app_request(ByteView payload);
Bytes encode(const AppResult& m);
Bytes encode_identity_request();
Bytes encode(const IdentityResponse& m);
Bytes encode(const ErrorResponse& m);

StatusRequest decode_status_request(ByteView in);
StatusResponse decode_status_response(ByteView in);
UpdateBundle decode_update_request(ByteView in);
tlog::SignedHead decode_update_response(ByteView in);
Bytes decode_app_request(ByteView in);
AppResult decode_app_response(ByteView in);
IdentityResponse decode_identity_response(ByteView in);
ErrorResponse decode_error(ByteView in);

// Serves one request payload against a node. Never throws: failures become
// ErrorResponse payloads.
Bytes dispatch(Node& node, ByteView request);

// Frame I/O on a connected stream socket. read_frame returns nullopt on a
// clean EOF before the first byte; throws Error on truncation or oversize.
std::optional<Bytes> read_frame(int fd);
void write_frame(int fd, ByteView payload);

}  // namespace dtrust::node::wire
