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

#include "dtrust/node/client.h"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dtrust/canon/encoding.h"
#include "dtrust/node/server.h"

namespace dtrust::node {

Bytes FramedClient::call(ByteView request, Tag expected) {
  Bytes response = round_trip(request);
  uint8_t tag;
  try {
    tag = Decoder::peek_tag(response);
  } catch (const DecodeError& e) {
    throw Unreachable(std::string("malformed response: ") + e.what());
  }
  if (tag == static_cast<uint8_t>(Tag::kErrorResponse)) {
    wire::ErrorResponse err;
    try {
      err = wire::decode_error(response);
    } catch (const DecodeError& e) {
      throw Unreachable(std::string("malformed error response: ") + e.what());
    }
    if (err.code == wire::ErrorCode::kUpdateRejected && err.subcode >= 1 && err.subcode <= 4) {
      throw UpdateRejected(static_cast<UpdateRejected::Reason>(err.subcode), err.detail);
    }
    throw RemoteError(err.code, err.detail);
  }
  if (tag != static_cast<uint8_t>(expected)) throw Unreachable("unexpected response type");
  return response;
}

template <typename F>
auto decoded(F&& f) {
  try {
    return f();
  } catch (const DecodeError& e) {
    throw Unreachable(std::string("malformed response: ") + e.what());
  }
}

StatusResponse FramedClient::status(ByteView nonce, std::optional<uint64_t> known_seq) {
  Bytes r = call(wire::encode(wire::StatusRequest{Bytes(nonce.begin(), nonce.end()), known_seq}),
                 Tag::kStatusResponse);
  return decoded([&] { return wire::decode_status_response(r); });
}

tlog::SignedHead FramedClient::update(const UpdateBundle& bundle) {
  Bytes r = call(wire::encode(bundle), Tag::kUpdateResponse);
  return decoded([&] { return wire::decode_update_response(r); });
}

AppResult FramedClient::app_request(ByteView payload) {
  Bytes r = call(wire::encode_app_request(payload), Tag::kAppResponse);
  return decoded([&] { return wire::decode_app_response(r); });
}

wire::IdentityResponse FramedClient::identity() {
  Bytes r = call(wire::encode_identity_request(), Tag::kIdentityResponse);
  return decoded([&] { return wire::decode_identity_response(r); });
}

TcpClient::TcpClient(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

Bytes TcpClient::round_trip(ByteView request) {
  std::string host;
  uint16_t port;
  try {
    std::tie(host, port) = split_endpoint(endpoint_);
  } catch (const Error& e) {
    throw Unreachable(e.what());
  }

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res); rc != 0) {
    throw Unreachable(endpoint_ + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    timeval tv{};
    tv.tv_sec = timeout_.count() / 1000;
    tv.tv_usec = (timeout_.count() % 1000) * 1000;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Unreachable(endpoint_ + ": " + last_error);

  try {
    wire::write_frame(fd, request);
    auto response = wire::read_frame(fd);
    ::close(fd);
    if (!response) throw Unreachable(endpoint_ + ": connection closed without a response");
    return std::move(*response);
  } catch (const Unreachable&) {
    throw;
  } catch (const Error& e) {
    ::close(fd);
    throw Unreachable(endpoint_ + ": " + e.what());
  }
}

}  // namespace dtrust::node
