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

#include <gtest/gtest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "dtrust/apps/catalog.h"
#include "dtrust/canon/encoding.h"
#include "dtrust/canon/fileio.h"
#include "dtrust/node/client.h"
#include "dtrust/node/node.h"
#include "dtrust/node/server.h"
#include "dtrust/node/wire.h"
#include "dtrust/sandbox/assembler.h"

namespace dtrust::node {
namespace {

using attest::BackendKind;
using tlog::kEmptySeq;

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("dtrust_node_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

struct CrashInjected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NodeTest : public ::testing::Test {
 protected:
  NodeTest()
      : dev_(SigningKey::generate()),
        manufacturer_(attest::SimulatedManufacturer::generate(BackendKind::kSimA)),
        backend_(std::make_shared<attest::SimulatedBackend>(
            attest::SimulatedBackend::provision(manufacturer_, as_bytes("d1")))) {
    roots_.add(BackendKind::kSimA, manufacturer_.root_pk());
  }

  NodeConfig config(const std::filesystem::path& data_dir = {}) {
    NodeConfig c;
    c.domain_id = "d1";
    c.backend = BackendKind::kSimA;
    c.developer_pk = dev_.public_key();
    c.framework_digest = sha256(as_bytes("framework build"));
    c.data_dir = data_dir;
    c.limits.max_millis_per_request = 300;
    return c;
  }

  std::unique_ptr<Node> make(const std::filesystem::path& data_dir = {}) {
    return std::make_unique<Node>(config(data_dir), backend_);
  }

  UpdateBundle release(std::string_view app, uint64_t version) {
    return sign_update(dev_, apps::bundle(app).code, version);
  }

  static uint64_t counter_value(const AppResult& r) {
    EXPECT_EQ(r.status, AppStatus::kOk) << r.error;
    if (r.output.size() != 9) return ~0ull;
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(r.output[1 + i]) << (8 * i);
    return v;
  }

  const PublicKey& att_pk() const { return backend_->identity().attestation_pk; }

  SigningKey dev_;
  attest::SimulatedManufacturer manufacturer_;
  std::shared_ptr<attest::SimulatedBackend> backend_;
  attest::TrustRoots roots_;
};

TEST_F(NodeTest, FreshNodeHasEmptyLogAndNoApp) {
  auto node = make();
  auto nonce = attest::random_nonce();
  StatusResponse s = node->status(nonce, std::nullopt);
  EXPECT_TRUE(s.doc.log_head.empty());
  EXPECT_TRUE(s.doc.app_digest.is_zero());
  EXPECT_TRUE(attest::verify_document(s.doc, node->identity(), nonce, roots_).is_valid());
  AppResult r = node->app_request(as_bytes("hi"));
  EXPECT_EQ(r.status, AppStatus::kNoApp);
  EXPECT_TRUE(r.head.head.empty());
  EXPECT_TRUE(tlog::verify_signed_head(r.head, att_pk()));
}

TEST_F(NodeTest, InstallServesAndAttests) {
  auto node = make();
  UpdateBundle b = release("echo", 1);
  tlog::SignedHead head = node->apply_update(b);
  EXPECT_EQ(head.head.seq, 0u);
  EXPECT_TRUE(tlog::verify_signed_head(head, att_pk()));

  auto nonce = attest::random_nonce();
  StatusResponse s = node->status(nonce, std::nullopt);
  EXPECT_EQ(s.doc.log_head.seq, 0u);
  EXPECT_EQ(s.doc.app_digest, b.app_digest());
  EXPECT_EQ(s.doc.framework_digest, node->config().framework_digest);
  EXPECT_EQ(s.head, head);
  EXPECT_TRUE(attest::verify_document(s.doc, node->identity(), nonce, roots_).is_valid());

  AppResult r = node->app_request(as_bytes("ping"));
  EXPECT_EQ(r.status, AppStatus::kOk);
  EXPECT_EQ(dtrust::to_string(r.output), "ping");
  EXPECT_EQ(r.head, head);
  EXPECT_EQ(node->app_request({}).output, Bytes{});
}

TEST_F(NodeTest, RejectsBadSignatureRollbackAndUnloadableCode) {
  auto node = make();
  node->apply_update(release("counter_v1", 1));
  auto before = node->log_entries();

  SigningKey other = SigningKey::generate();
  try {
    node->apply_update(sign_update(other, apps::bundle("counter_v2").code, 2));
    FAIL();
  } catch (const UpdateRejected& e) {
    EXPECT_EQ(e.reason(), UpdateRejected::Reason::kSignature);
  }
  UpdateBundle tampered = release("counter_v2", 2);
  tampered.code.push_back(0);
  EXPECT_THROW(node->apply_update(tampered), UpdateRejected);

  for (uint64_t v : {0, 1}) {
    try {
      node->apply_update(release("counter_v2", v));
      FAIL();
    } catch (const UpdateRejected& e) {
      EXPECT_EQ(e.reason(), UpdateRejected::Reason::kRollback);
    }
  }

  for (Bytes code : {to_bytes("not a module"),
                     sandbox::assemble(".import fs_open\n.func handle\n  host r0, fs_open, r1\n  ret r0\n")}) {
    try {
      node->apply_update(sign_update(dev_, code, 5));
      FAIL();
    } catch (const UpdateRejected& e) {
      EXPECT_EQ(e.reason(), UpdateRejected::Reason::kLoad);
    }
  }
  EXPECT_EQ(node->log_entries(), before);
  EXPECT_EQ(node->active_digest(), before.back().code_digest);
}

TEST_F(NodeTest, UpdatePreservesStateAndExtendsLog) {
  auto node = make();
  node->apply_update(release("counter_v1", 1));
  for (uint64_t i = 1; i <= 3; ++i) EXPECT_EQ(counter_value(node->app_request(as_bytes("+"))), i);

  UpdateBundle v2 = release("counter_v2", 2);
  tlog::SignedHead head = node->apply_update(v2);
  EXPECT_EQ(head.head.seq, 1u);
  auto entries = node->log_entries();
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[1].code_digest, v2.app_digest());
  EXPECT_EQ(entries[1].version, 2u);

  AppResult r = node->app_request(as_bytes("g"));
  EXPECT_EQ(r.output[0], 2);
  EXPECT_EQ(counter_value(r), 3u);
  EXPECT_EQ(r.head, head);
}

TEST_F(NodeTest, StatusDeltaAndAnchor) {
  auto node = make();
  node->apply_update(release("counter_v1", 1));
  node->apply_update(release("counter_v2", 2));
  node->apply_update(release("counter_v1", 3));
  auto nonce = attest::random_nonce();

  StatusResponse s = node->status(nonce, 2);
  ASSERT_TRUE(s.delta);
  EXPECT_TRUE(s.delta->empty());
  ASSERT_TRUE(s.anchor);
  EXPECT_EQ(*s.anchor, s.head);

  s = node->status(nonce, 0);
  ASSERT_TRUE(s.delta);
  ASSERT_EQ(s.delta->size(), 2u);
  ASSERT_TRUE(s.anchor);
  EXPECT_TRUE(tlog::verify_signed_head(*s.anchor, att_pk()));
  EXPECT_TRUE(tlog::is_prefix(s.anchor->head, *s.delta, s.doc.log_head));

  s = node->status(nonce, kEmptySeq);
  ASSERT_TRUE(s.delta);
  EXPECT_EQ(s.delta->size(), 3u);
  EXPECT_TRUE(tlog::verify_chain(*s.delta, s.doc.log_head));

  s = node->status(nonce, 7);
  EXPECT_FALSE(s.delta);
  EXPECT_FALSE(s.anchor);

  EXPECT_THROW(node->status(Bytes(31), std::nullopt), BadRequest);
}

TEST_F(NodeTest, MisbehavingAppDoesNotBlockStatusOrUpdates) {
  auto node = make();
  node->apply_update(release("faulty", 1));
  EXPECT_EQ(node->app_request(as_bytes("t")).status, AppStatus::kAppFault);
  AppResult timed = node->app_request(as_bytes("l"));
  EXPECT_EQ(timed.status, AppStatus::kTimeout);
  EXPECT_TRUE(tlog::verify_signed_head(timed.head, att_pk()));
  EXPECT_EQ(node->app_request(as_bytes("m")).status, AppStatus::kMemoryExceeded);
  EXPECT_EQ(dtrust::to_string(node->app_request(as_bytes("?")).output), "ok");

  EXPECT_NO_THROW(node->status(attest::random_nonce(), std::nullopt));
  node->apply_update(release("echo", 2));
  EXPECT_EQ(dtrust::to_string(node->app_request(as_bytes("back")).output), "back");
}

TEST_F(NodeTest, StateSurvivesRestart) {
  TempDir dir;
  UpdateBundle v1 = release("counter_v1", 1);
  tlog::SignedHead head;
  {
    auto node = make(dir.path());
    head = node->apply_update(v1);
    for (int i = 0; i < 3; ++i) node->app_request(as_bytes("+"));
  }
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "log.bin"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "state.kv"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "bundles" / (v1.app_digest().hex() + ".bin")));

  auto node = make(dir.path());
  EXPECT_EQ(node->signed_head(), head);
  EXPECT_EQ(counter_value(node->app_request(as_bytes("+"))), 4u);
  node->apply_update(release("counter_v2", 2));
  EXPECT_EQ(counter_value(node->app_request(as_bytes("g"))), 4u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "bundles" / (v1.app_digest().hex() + ".bin")));
}

// A crash anywhere in apply_update must never leave a node that serves code
// without its log entry, and restart must serve exactly the latest entry.
TEST_F(NodeTest, CrashInjectionPreservesLogBeforeActivate) {
  for (const char* point : {"bundle_written", "appended", "signed"}) {
    SCOPED_TRACE(point);
    TempDir dir;
    UpdateBundle v1 = release("counter_v1", 1), v2 = release("counter_v2", 2);
    {
      auto node = make(dir.path());
      node->apply_update(v1);
      node->set_fail_point([&](std::string_view p) {
        if (p == point) throw CrashInjected(point);
      });
      EXPECT_THROW(node->apply_update(v2), CrashInjected);
      auto entries = node->log_entries();
      ASSERT_FALSE(entries.empty());
      // Still serving the old bundle, whose entry exists.
      EXPECT_EQ(node->active_digest(), v1.app_digest());
      EXPECT_EQ(node->app_request(as_bytes("g")).output[0], 1);
    }
    auto node = make(dir.path());
    auto entries = node->log_entries();
    bool appended = std::string_view(point) != "bundle_written";
    ASSERT_EQ(entries.size(), appended ? 2u : 1u);
    EXPECT_EQ(node->active_digest(), entries.back().code_digest);
    EXPECT_EQ(node->app_request(as_bytes("g")).output[0], appended ? 2 : 1);
    if (!appended) EXPECT_NO_THROW(node->apply_update(v2));
  }
}

TEST_F(NodeTest, StartupRejectsDamagedState) {
  UpdateBundle v1 = release("echo", 1);
  {
    TempDir dir;
    make(dir.path())->apply_update(v1);
    std::filesystem::remove(dir.path() / "bundles" / (v1.app_digest().hex() + ".bin"));
    EXPECT_THROW(make(dir.path()), StateVerificationFailed);
  }
  {
    TempDir dir;
    make(dir.path())->apply_update(v1);
    auto path = dir.path() / "bundles" / (v1.app_digest().hex() + ".bin");
    Bytes code = read_file(path);
    code.back() ^= 1;
    write_file_atomic(path, code);
    EXPECT_THROW(make(dir.path()), StateVerificationFailed);
  }
  {
    TempDir dir;
    make(dir.path())->apply_update(v1);
    auto path = dir.path() / "log.bin";
    Bytes log = read_file(path);
    log[20] ^= 1;
    write_file_atomic(path, log);
    EXPECT_THROW(make(dir.path()), StateVerificationFailed);
  }
  {
    // Entry appended under a key the node was not sealed with.
    TempDir dir;
    make(dir.path())->apply_update(v1);
    NodeConfig c = config(dir.path());
    c.developer_pk = SigningKey::generate().public_key();
    EXPECT_THROW(Node(c, backend_), StateVerificationFailed);
  }
}

TEST_F(NodeTest, ConstructorChecksBackendMatchesConfig) {
  NodeConfig c = config();
  c.domain_id = "other";
  EXPECT_THROW(Node(c, backend_), ConfigError);
  c = config();
  c.backend = BackendKind::kSimB;
  EXPECT_THROW(Node(c, backend_), ConfigError);
}

TEST_F(NodeTest, LocalClientRoundTripsEveryMessage) {
  auto node = make();
  LocalClient client(*node);
  UpdateBundle v1 = release("counter_v1", 1);
  tlog::SignedHead head = client.update(v1);
  EXPECT_EQ(head, node->signed_head());
  try {
    client.update(v1);
    FAIL();
  } catch (const UpdateRejected& e) {
    EXPECT_EQ(e.reason(), UpdateRejected::Reason::kRollback);
  }
  AppResult r = client.app_request(as_bytes("+"));
  EXPECT_EQ(counter_value(r), 1u);
  EXPECT_EQ(r.head, head);

  auto nonce = attest::random_nonce();
  StatusResponse s = client.status(nonce, kEmptySeq);
  EXPECT_EQ(s.doc, node->status(nonce, kEmptySeq).doc);
  ASSERT_TRUE(s.delta);
  EXPECT_EQ(*s.delta, node->log_entries());

  wire::IdentityResponse id = client.identity();
  EXPECT_EQ(id.identity, node->identity());
  EXPECT_EQ(id.framework_digest, node->config().framework_digest);

  EXPECT_THROW(client.status(Bytes(5), std::nullopt), RemoteError);
}

// No message, well-formed or not, can change the sealed developer key or
// the log.
TEST_F(NodeTest, ArbitraryMessagesCannotChangeSealedKeyOrLog) {
  auto node = make();
  node->apply_update(release("echo", 1));
  const PublicKey sealed = node->developer_pk();
  const auto entries = node->log_entries();
  std::mt19937 rng(17);
  SigningKey attacker = SigningKey::generate();
  for (int i = 0; i < 2000; ++i) {
    Bytes msg(1 + rng() % 80);
    for (auto& b : msg) b = static_cast<uint8_t>(rng());
    if (i % 4 == 0) msg[0] = static_cast<uint8_t>(0x20 + rng() % 16);
    if (i % 50 == 0) msg = wire::encode(sign_update(attacker, apps::bundle("counter_v1").code, 9));
    Bytes out = wire::dispatch(*node, msg);
    EXPECT_FALSE(out.empty());
  }
  EXPECT_EQ(node->developer_pk(), sealed);
  EXPECT_EQ(node->log_entries(), entries);
}

TEST_F(NodeTest, TcpServerAndClient) {
  auto node = make();
  TcpServer server(*node, "127.0.0.1:0");
  server.start();
  ASSERT_NE(server.port(), 0);
  TcpClient client(server.endpoint());
  client.update(release("echo", 1));
  EXPECT_EQ(dtrust::to_string(client.app_request(as_bytes("over tcp")).output), "over tcp");
  Bytes big(3 << 20, 'z');
  EXPECT_EQ(client.app_request(big).output, big);
  auto nonce = attest::random_nonce();
  StatusResponse s = client.status(nonce, 0);
  EXPECT_TRUE(attest::verify_document(s.doc, node->identity(), nonce, roots_).is_valid());

  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      TcpClient c(server.endpoint());
      for (int i = 0; i < 10; ++i) {
        std::string msg = std::to_string(t) + ":" + std::to_string(i);
        if (dtrust::to_string(c.app_request(as_bytes(msg)).output) == msg) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 80);
  server.stop();
  EXPECT_THROW(TcpClient(server.endpoint(), std::chrono::milliseconds(500)).identity(), Unreachable);
}

TEST(TcpClientErrors, UnreachableEndpoints) {
  EXPECT_THROW(TcpClient("127.0.0.1:1", std::chrono::milliseconds(300)).identity(), Unreachable);
  EXPECT_THROW(TcpClient("no-port").identity(), Unreachable);
  EXPECT_THROW(split_endpoint("host:99999"), Error);
  EXPECT_EQ(split_endpoint("[::1]:80"), (std::pair<std::string, uint16_t>{"::1", 80}));
}

// Requests racing updates always carry a head consistent with the code that
// produced the output.
TEST_F(NodeTest, RequestsRacingUpdatesCarryConsistentHeads) {
  auto node = make();
  node->apply_update(release("counter_v1", 1));
  std::atomic<bool> done{false};
  std::atomic<int> checked{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      while (!done) {
        AppResult r = node->app_request(as_bytes("g"));
        ASSERT_EQ(r.status, AppStatus::kOk);
        ASSERT_TRUE(tlog::verify_signed_head(r.head, att_pk()));
        // Odd seq numbers run counter_v2, even ones counter_v1.
        ASSERT_EQ(r.output[0], r.head.head.seq % 2 == 0 ? 1 : 2);
        ++checked;
      }
    });
  }
  for (uint64_t v = 2; v <= 12; ++v) node->apply_update(release(v % 2 ? "counter_v1" : "counter_v2", v));
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_GT(checked.load(), 0);
  auto entries = node->log_entries();
  EXPECT_TRUE(tlog::verify_chain(entries, node->signed_head().head));
}

TEST(NodeConfig, ParsesTomlWithRelativePaths) {
  TempDir dir;
  SigningKey dev = SigningKey::generate();
  write_key_file(dir.path() / "dev.pub", dev.public_key().view());
  std::string text = R"(
domain_id = "d7"
listen = "127.0.0.1:7407"
backend = "sim-b"
developer_pk_file = "dev.pub"
framework_digest = ")" + sha256(as_bytes("fw")).hex() + R"("
data_dir = "state"
engine = "interpreter"

[limits]
max_memory_bytes = 1048576
max_millis_per_request = 250
)";
  NodeConfig c = NodeConfig::parse(text, dir.path());
  EXPECT_EQ(c.domain_id, "d7");
  EXPECT_EQ(c.listen, "127.0.0.1:7407");
  EXPECT_EQ(c.backend, BackendKind::kSimB);
  EXPECT_EQ(c.developer_pk, dev.public_key());
  EXPECT_EQ(c.framework_digest, sha256(as_bytes("fw")));
  EXPECT_EQ(c.data_dir, dir.path() / "state");
  EXPECT_EQ(c.identity_path(), dir.path() / "state" / "identity" / "identity.bin");
  EXPECT_EQ(c.engine, sandbox::Engine::kInterpreter);
  EXPECT_EQ(c.limits.max_memory_bytes, 1048576u);
  EXPECT_EQ(c.limits.max_millis_per_request, 250u);

  EXPECT_THROW(NodeConfig::parse("listen = \"x:1\"", dir.path()), ConfigError);
  EXPECT_THROW(NodeConfig::parse("domain_id = \"d\"", dir.path()), ConfigError);
  EXPECT_THROW(NodeConfig::parse("domain_id = [", dir.path()), ConfigError);
  std::string neg = "domain_id = \"d\"\ndeveloper_pk = \"" + dev.public_key().hex() +
                    "\"\n[limits]\nmax_millis_per_request = 0\n";
  EXPECT_THROW(NodeConfig::parse(neg, dir.path()), ConfigError);
  std::string no_dir = "domain_id = \"d\"\nbackend = \"sim-a\"\ndeveloper_pk = \"" +
                       dev.public_key().hex() + "\"\n";
  EXPECT_THROW(NodeConfig::parse(no_dir, dir.path()), ConfigError);
}

TEST(NodeOpen, LoadsProvisionedKeyMaterial) {
  TempDir dir;
  SigningKey dev = SigningKey::generate();
  auto manu = attest::SimulatedManufacturer::generate(BackendKind::kSimC);
  auto backend = attest::SimulatedBackend::provision(manu, as_bytes("dz"));
  std::filesystem::create_directories(dir.path() / "identity");
  attest::save_identity(dir.path() / "identity" / "identity.bin", backend.identity());
  write_key_file(dir.path() / "identity" / "attestation.key", backend.attestation_key().seed());

  NodeConfig c;
  c.domain_id = "dz";
  c.backend = BackendKind::kSimC;
  c.developer_pk = dev.public_key();
  c.data_dir = dir.path();
  auto node = Node::open(c);
  EXPECT_EQ(node->identity(), backend.identity());
  node->apply_update(sign_update(dev, apps::bundle("echo").code, 1));
  EXPECT_TRUE(tlog::verify_signed_head(node->signed_head(), backend.identity().attestation_pk));

  std::filesystem::remove(dir.path() / "identity" / "attestation.key");
  EXPECT_THROW(Node::open(c), ConfigError);
}

}  // namespace
}  // namespace dtrust::node
