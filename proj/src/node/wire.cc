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

#include "dtrust/node/wire.h"

#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dtrust/canon/encoding.h"

namespace dtrust::node::wire {

namespace {

std::optional<uint64_t> get_optional_u64(Decoder& d) {
  uint64_t has = d.u64();
  uint64_t v = d.u64();
  if (has > 1) throw DecodeError("bad presence flag");
  if (!has) return std::nullopt;
  return v;
}

}  // namespace

Bytes encode(const StatusRequest& m) {
  return Encoder(Tag::kStatusRequest)
      .bytes(m.nonce)
      .u64(m.known_seq ? 1 : 0)
      .u64(m.known_seq.value_or(0))
      .finish();
}

StatusRequest decode_status_request(ByteView in) {
  Decoder d(in, Tag::kStatusRequest);
  StatusRequest m;
  m.nonce = d.bytes();
  m.known_seq = get_optional_u64(d);
  d.finish();
  return m;
}

Bytes encode(const StatusResponse& m) {
  Encoder enc(Tag::kStatusResponse);
  enc.bytes(m.doc.encode()).bytes(m.head.encode());
  std::vector<Bytes> entries;
  if (m.delta) {
    for (const auto& e : *m.delta) entries.push_back(e.encode());
  }
  enc.u64(m.delta ? 1 : 0).list(entries);
  enc.u64(m.anchor ? 1 : 0).bytes(m.anchor ? m.anchor->encode() : Bytes{});
  return enc.finish();
}

StatusResponse decode_status_response(ByteView in) {
  Decoder d(in, Tag::kStatusResponse);
  StatusResponse m;
  m.doc = attest::AttestationDocument::decode(d.bytes());
  m.head = tlog::SignedHead::decode(d.bytes());
  uint64_t has_delta = d.u64();
  std::vector<Bytes> entries = d.list();
  if (has_delta > 1) throw DecodeError("bad presence flag");
  if (has_delta) {
    m.delta.emplace();
    for (const Bytes& e : entries) m.delta->push_back(tlog::LogEntry::decode(e));
  } else if (!entries.empty()) {
    throw DecodeError("delta entries without presence flag");
  }
  uint64_t has_anchor = d.u64();
  Bytes anchor = d.bytes();
  if (has_anchor > 1) throw DecodeError("bad presence flag");
  if (has_anchor) {
    m.anchor = tlog::SignedHead::decode(anchor);
  } else if (!anchor.empty()) {
    throw DecodeError("anchor without presence flag");
  }
  d.finish();
  return m;
}

Bytes encode(const UpdateBundle& m) { return m.encode(); }

UpdateBundle decode_update_request(ByteView in) { return UpdateBundle::decode(in); }

Bytes encode_update_response(const tlog::SignedHead& head) {
  return Encoder(Tag::kUpdateResponse).bytes(head.encode()).finish();
}

tlog::SignedHead decode_update_response(ByteView in) {
  Decoder d(in, Tag::kUpdateResponse);
  auto head = tlog::SignedHead::decode(d.bytes());
  d.finish();
  return head;
}

Bytes encode_app_request(ByteView payload) {
  return Encoder(Tag::kAppRequest).bytes(payload).finish();
}

Bytes decode_app_request(ByteView in) {
  Decoder d(in, Tag::kAppRequest);
  Bytes payload = d.bytes();
  d.finish();
  return payload;
}

Bytes encode(const AppResult& m) {
  return Encoder(Tag::kAppResponse)
      .u64(static_cast<uint64_t>(m.status))
      .bytes(m.output)
      .bytes(m.error)
      .bytes(m.head.encode())
      .finish();
}

AppResult decode_app_response(ByteView in) {
  Decoder d(in, Tag::kAppResponse);
  AppResult m;
  uint64_t status = d.u64();
  if (status > static_cast<uint64_t>(AppStatus::kNoApp)) throw DecodeError("bad app status");
  m.status = static_cast<AppStatus>(status);
  m.output = d.bytes();
  m.error = d.string();
  m.head = tlog::SignedHead::decode(d.bytes());
  d.finish();
  return m;
}

Bytes encode_identity_request() { return Encoder(Tag::kIdentityRequest).finish(); }

Bytes encode(const IdentityResponse& m) {
  return Encoder(Tag::kIdentityResponse)
      .bytes(m.identity.encode())
      .digest(m.framework_digest)
      .finish();
}

IdentityResponse decode_identity_response(ByteView in) {
  Decoder d(in, Tag::kIdentityResponse);
  IdentityResponse m;
  m.identity = attest::BackendIdentity::decode(d.bytes());
  m.framework_digest = d.digest();
  d.finish();
  return m;
}

Bytes encode(const ErrorResponse& m) {
  return Encoder(Tag::kErrorResponse)
      .u64(static_cast<uint64_t>(m.code))
      .u64(m.subcode)
      .bytes(m.detail)
      .finish();
}

ErrorResponse decode_error(ByteView in) {
  Decoder d(in, Tag::kErrorResponse);
  ErrorResponse m;
  uint64_t code = d.u64();
  uint64_t sub = d.u64();
  if (code < 1 || code > 3 || sub > 255) throw DecodeError("bad error code");
  m.code = static_cast<ErrorCode>(code);
  m.subcode = static_cast<uint8_t>(sub);
  m.detail = d.string();
  d.finish();
  return m;
}

Bytes dispatch(Node& node, ByteView request) {
  try {
    switch (static_cast<Tag>(Decoder::peek_tag(request))) {
      case Tag::kStatusRequest: {
        StatusRequest req = decode_status_request(request);
        return encode(node.status(req.nonce, req.known_seq));
      }
      case Tag::kUpdateRequest:
        return encode_update_response(node.apply_update(decode_update_request(request)));
      case Tag::kAppRequest:
        return encode(node.app_request(decode_app_request(request)));
      case Tag::kIdentityRequest: {
        Decoder(request, Tag::kIdentityRequest).finish();
        return encode(IdentityResponse{node.identity(), node.config().framework_digest});
      }
      default:
        return encode(ErrorResponse{ErrorCode::kBadRequest, 0, "unknown message type"});
    }
  } catch (const UpdateRejected& e) {
    return encode(ErrorResponse{ErrorCode::kUpdateRejected, static_cast<uint8_t>(e.reason()),
                                e.detail()});
  } catch (const DecodeError& e) {
    return encode(ErrorResponse{ErrorCode::kBadRequest, 0, e.what()});
  } catch (const BadRequest& e) {
    return encode(ErrorResponse{ErrorCode::kBadRequest, 0, e.what()});
  } catch (const std::exception& e) {
    return encode(ErrorResponse{ErrorCode::kInternal, 0, e.what()});
  }
}

namespace {

// Returns bytes read; short only at EOF.
size_t read_fully(int fd, uint8_t* buf, size_t n) {
  size_t got = 0;
  while (got < n) {
    ssize_t r = ::read(fd, buf + got, n - got);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw Error(std::string("read failed: ") + std::strerror(errno));
    if (r == 0) break;
    got += static_cast<size_t>(r);
  }
  return got;
}

}  // namespace

std::optional<Bytes> read_frame(int fd) {
  uint8_t len_buf[8];
  size_t got = read_fully(fd, len_buf, 8);
  if (got == 0) return std::nullopt;
  if (got < 8) throw Error("truncated frame header");
  uint64_t len = get_u64_be(ByteView(len_buf, 8));
  if (len > kMaxFrameBytes) throw Error("frame of " + std::to_string(len) + " bytes is too large");
  Bytes payload(len);
  if (read_fully(fd, payload.data(), len) != len) throw Error("truncated frame");
  return payload;
}

void write_frame(int fd, ByteView payload) {
  if (payload.size() > kMaxFrameBytes) throw Error("frame too large");
  Bytes frame;
  frame.reserve(8 + payload.size());
  put_u64_be(frame, payload.size());
  append(frame, payload);
  size_t sent = 0;
  while (sent < frame.size()) {
    ssize_t n = ::send(fd, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(std::string("write failed: ") + std::strerror(errno));
    sent += static_cast<size_t>(n);
  }
}

}  // namespace dtrust::node::wire
