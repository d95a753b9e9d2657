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

#include "dtrust/node/release.h"

#include "dtrust/canon/encoding.h"

namespace dtrust::node {

Bytes update_signing_message(const Digest& app_digest, uint64_t version) {
  return Encoder(Tag::kUpdate).digest(app_digest).u64(version).finish();
}

Bytes UpdateBundle::encode() const {
  return Encoder(Tag::kUpdateRequest).bytes(code).u64(version).bytes(dev_sig.view()).finish();
}

UpdateBundle UpdateBundle::decode(ByteView in) {
  Decoder d(in, Tag::kUpdateRequest);
  UpdateBundle b;
  b.code = d.bytes();
  b.version = d.u64();
  b.dev_sig = Signature::from_bytes(d.bytes());
  d.finish();
  return b;
}

UpdateBundle sign_update(const SigningKey& developer_key, Bytes code, uint64_t version) {
  UpdateBundle b;
  b.code = std::move(code);
  b.version = version;
  b.dev_sig = developer_key.sign(update_signing_message(b.app_digest(), version));
  return b;
}

Bytes PublishedRelease::encode() const {
  return Encoder(Tag::kPublishedRelease)
      .digest(app_digest)
      .u64(version)
      .bytes(dev_sig.view())
      .finish();
}

PublishedRelease PublishedRelease::decode(ByteView in) {
  Decoder d(in, Tag::kPublishedRelease);
  PublishedRelease r;
  r.app_digest = d.digest();
  r.version = d.u64();
  r.dev_sig = Signature::from_bytes(d.bytes());
  d.finish();
  return r;
}

bool verify_release(const PublicKey& developer_pk, const Digest& app_digest, uint64_t version,
                    const Signature& dev_sig) {
  return verify(developer_pk, update_signing_message(app_digest, version), dev_sig);
}

}  // namespace dtrust::node
