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

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>

#include "dtrust/apps/catalog.h"
#include "dtrust/auditor/auditor.h"
#include "dtrust/auditor/report_json.h"
#include "dtrust/node/server.h"
#include "dtrust/sim/deployment.h"
#include "dtrust/sim/scenario.h"

namespace dtrust::auditor {
namespace {

using attest::BackendKind;
using sim::Deployment;
using sim::Strategy;

std::mt19937_64& rng() {
  static std::mt19937_64 r(20261016);
  return r;
}

const DomainResult& result(const AuditReport& rep, std::string_view id) {
  for (const auto& r : rep.domains) {
    if (r.domain_id == id) return r;
  }
  throw std::runtime_error("no such domain");
}

// Fork of a node's history with the same length, diverging at entry 0.
std::vector<tlog::LogEntry> equal_length_fork(const Deployment& dep, size_t length) {
  tlog::HashChainLog log;
  for (uint64_t v = 1; v <= length; ++v) {
    auto b = node::sign_update(dep.developer(), apps::bundle(v % 2 ? "echo" : "faulty").code, v);
    log.append(b.app_digest(), b.version, b.dev_sig, 7);
  }
  return log.entries();
}

TEST(Audit, HonestMixedBackendsPass) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kNull}, 2});
  auto v1 = dep.release("counter_v1", 1);
  auto out = audit(dep.descriptor(), {}, dep.audit_options(true));
  const AuditReport& rep = out.report;
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.valid_count, 2u);
  EXPECT_EQ(result(rep, "domain-2").status, DomainStatus::kUnattested);
  EXPECT_TRUE(rep.digest_agreement);
  EXPECT_EQ(rep.agreed_app_digest, v1.app_digest());
  EXPECT_TRUE(rep.log_consistency);
  EXPECT_EQ(rep.backend_kinds.at(BackendKind::kSimA), 1u);
  EXPECT_EQ(rep.backend_kinds.at(BackendKind::kNull), 1u);
  EXPECT_TRUE(rep.proofs.empty());
  EXPECT_EQ(out.pins.size(), 3u);
  EXPECT_EQ(out.pins.find("domain-0")->code_digest, v1.app_digest());
  EXPECT_EQ(out.pins.find("domain-0")->version, 1u);
  EXPECT_EQ(result(rep, "domain-1").version, 1u);
}

TEST(Audit, SingleDomainDeployment) {
  Deployment dep({{BackendKind::kSimC}, 1});
  dep.release("echo", 1);
  EXPECT_TRUE(audit(dep.descriptor(), {}, dep.audit_options()).report.pass);
}

TEST(Audit, UnattestedDomainsNeverCountTowardThreshold) {
  Deployment dep({{BackendKind::kNull, BackendKind::kSimA}, 2});
  dep.release("echo", 1);
  auto rep = audit(dep.descriptor(), {}, dep.audit_options()).report;
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.valid_count, 1u);
  EXPECT_TRUE(rep.digest_agreement);
}

TEST(Audit, WrongDigestFailsWithTransferableProof) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kSimC}, 2});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto pins = audit(dep.descriptor(), {}, dep.audit_options()).pins;
  dep.corrupt(1, Strategy::kWrongDigest, rng());

  auto rep = audit(dep.descriptor(), pins, dep.audit_options()).report;
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.digest_agreement);
  EXPECT_EQ(result(rep, "domain-1").status, DomainStatus::kValid);
  ASSERT_EQ(rep.proofs.size(), 1u);
  const MisbehaviorProof& p = rep.proofs[0];
  EXPECT_EQ(p.kind(), MisbehaviorProof::Kind::kDigestMismatch);
  EXPECT_EQ(p.domain_id(), "domain-1");

  const auto& roots = dep.trust_roots();
  const PublicKey dev = dep.developer().public_key();
  MisbehaviorProof decoded = MisbehaviorProof::decode(p.encode());
  EXPECT_TRUE(verify_misbehavior(decoded, roots, dev));
  EXPECT_FALSE(verify_misbehavior(decoded, {}, dev));
  EXPECT_FALSE(verify_misbehavior(decoded, roots, SigningKey::generate().public_key()));

  auto& m = std::get<DigestMismatchProof>(decoded.evidence);
  MisbehaviorProof same = decoded;
  std::get<DigestMismatchProof>(same.evidence).release.app_digest = m.doc.app_digest;
  EXPECT_FALSE(verify_misbehavior(same, roots, dev));
  MisbehaviorProof bad_sig = decoded;
  std::get<DigestMismatchProof>(bad_sig.evidence).doc.signature->mutable_bytes()[5] ^= 1;
  EXPECT_EQ(check_misbehavior(bad_sig, roots, dev), "document signature does not verify");
}

TEST(Audit, DisagreementWithoutPublishedReleaseStillFails) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 1});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto desc = dep.descriptor();
  desc.release.reset();
  dep.corrupt(0, Strategy::kWrongDigest, rng());
  auto rep = audit(desc, {}, dep.audit_options()).report;
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.digest_agreement);
  EXPECT_TRUE(rep.proofs.empty());
}

TEST(Audit, AgreeingDomainsOnUnpublishedCodeFail) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 2});
  auto v1 = dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto desc = dep.descriptor();
  desc.release = node::PublishedRelease::of(v1);
  auto rep = audit(desc, {}, dep.audit_options()).report;
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.proofs.size(), 2u);
}

TEST(Audit, ForkedLogFailsWithEquivocationProof) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 1});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto first = audit(dep.descriptor(), {}, dep.audit_options());
  dep.corrupt(0, Strategy::kForkedLog, rng());

  auto second = audit(dep.descriptor(), first.pins, dep.audit_options());
  EXPECT_FALSE(second.report.pass);
  EXPECT_FALSE(second.report.log_consistency);
  EXPECT_FALSE(result(second.report, "domain-0").log_consistent);
  // The pin for the forked domain is not advanced.
  EXPECT_EQ(*second.pins.find("domain-0"), *first.pins.find("domain-0"));

  bool found = false;
  for (const auto& p : second.report.proofs) {
    if (p.kind() != MisbehaviorProof::Kind::kEquivocation) continue;
    found = true;
    EXPECT_EQ(p.domain_id(), "domain-0");
    EXPECT_TRUE(verify_misbehavior(MisbehaviorProof::decode(p.encode()), dep.trust_roots(),
                                   dep.developer().public_key()));
  }
  EXPECT_TRUE(found);

  UpdateCheck c = check_update(dep.descriptor(), first.pins, dep.audit_options());
  EXPECT_EQ(c.kind, UpdateCheck::Kind::kInconsistent);
  EXPECT_EQ(c.inconsistent, std::vector<std::string>{"domain-0"});
  EXPECT_FALSE(c.proofs.empty());
}

TEST(Audit, StaleRollbackFails) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kSimC}, 1});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto first = audit(dep.descriptor(), {}, dep.audit_options());
  dep.corrupt(2, Strategy::kStaleRollback, rng());
  auto rep = audit(dep.descriptor(), first.pins, dep.audit_options()).report;
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(result(rep, "domain-2").log_consistent);
  EXPECT_EQ(check_update(dep.descriptor(), first.pins, dep.audit_options()).kind,
            UpdateCheck::Kind::kInconsistent);
}

TEST(Audit, UnreachableDomainsAreReported) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kSimC}, 2});
  dep.release("echo", 1);
  dep.corrupt(1, Strategy::kUnreachable, rng());
  auto rep = audit(dep.descriptor(), {}, dep.audit_options()).report;
  EXPECT_EQ(rep.domains.size(), 3u);
  EXPECT_EQ(result(rep, "domain-1").status, DomainStatus::kUnreachable);
  EXPECT_FALSE(result(rep, "domain-1").reason.empty());
  EXPECT_TRUE(rep.pass);
  dep.corrupt(2, Strategy::kUnreachable, rng());
  EXPECT_FALSE(audit(dep.descriptor(), {}, dep.audit_options()).report.pass);
}

TEST(Audit, RejectsUntrustedOrMismatchedIdentities) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 2});
  dep.release("echo", 1);
  auto desc = dep.descriptor();
  desc.trust_roots = {};
  auto rep = audit(desc, {}, dep.audit_options()).report;
  EXPECT_EQ(rep.valid_count, 0u);
  EXPECT_EQ(result(rep, "domain-0").status, DomainStatus::kInvalid);
  EXPECT_EQ(result(rep, "domain-0").reason, "untrusted root");
  EXPECT_FALSE(rep.pass);

  desc = dep.descriptor();
  std::swap(desc.domains[0].identity, desc.domains[1].identity);
  rep = audit(desc, {}, dep.audit_options()).report;
  EXPECT_EQ(result(rep, "domain-0").status, DomainStatus::kInvalid);

  desc = dep.descriptor();
  desc.framework_digest = sha256(as_bytes("another build"));
  rep = audit(desc, {}, dep.audit_options()).report;
  EXPECT_EQ(rep.valid_count, 2u);
  EXPECT_FALSE(rep.digest_agreement);
  EXPECT_FALSE(rep.pass);
}

TEST(CheckUpdate, ObservesUpdatesAndAdoption) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kNull}, 2});
  dep.release("counter_v1", 1);
  auto pins = audit(dep.descriptor(), {}, dep.audit_options()).pins;

  UpdateCheck c = check_update(dep.descriptor(), pins, dep.audit_options());
  EXPECT_EQ(c.kind, UpdateCheck::Kind::kNoChange);
  EXPECT_EQ(c.pins, pins);

  // Only domain-0 has the new code so far.
  auto v2 = node::sign_update(dep.developer(), apps::bundle("counter_v2").code, 2);
  dep.node(0).apply_update(v2);
  c = check_update(dep.descriptor(), pins, dep.audit_options());
  EXPECT_EQ(c.kind, UpdateCheck::Kind::kUpdateObserved);
  EXPECT_EQ(c.new_digest, v2.app_digest());
  EXPECT_EQ(c.new_version, 2u);
  EXPECT_EQ(c.adoption.at("domain-0"), Adoption::kAdopted);
  EXPECT_EQ(c.adoption.at("domain-1"), Adoption::kNotAdopted);
  EXPECT_EQ(c.pins.find("domain-0")->head.head.seq, 1u);

  dep.node(1).apply_update(v2);
  dep.node(2).apply_update(v2);
  c = check_update(dep.descriptor(), pins, dep.audit_options());
  EXPECT_EQ(c.kind, UpdateCheck::Kind::kUpdateObserved);
  for (const auto& [id, a] : c.adoption) EXPECT_EQ(a, Adoption::kAdopted) << id;
  EXPECT_EQ(check_update(dep.descriptor(), c.pins, dep.audit_options()).kind, UpdateCheck::Kind::kNoChange);
}

// Pins only ever move forward, whatever the domains do.
TEST(PinProperty, SeqNeverDecreases) {
  for (int run = 0; run < 20; ++run) {
    Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kNull}, 1});
    dep.release("counter_v1", 1);
    PinStore pins;
    uint64_t version = 1;
    std::map<std::string, uint64_t> last;
    for (int step = 0; step < 12; ++step) {
      switch (rng()() % 4) {
        case 0: dep.release(version % 2 ? "counter_v2" : "counter_v1", ++version); break;
        case 1: dep.corrupt(rng()() % 3, static_cast<Strategy>(rng()() % 5), rng()); break;
        default: break;
      }
      pins = rng()() % 2 ? audit(dep.descriptor(), pins, dep.audit_options()).pins
                       : check_update(dep.descriptor(), pins, dep.audit_options()).pins;
      for (const auto& [id, pin] : pins.pins()) {
        uint64_t size = pin.head.head.size();
        EXPECT_GE(size, last[id]);
        last[id] = size;
      }
    }
  }
}

// An equivocating domain shows two auditors different histories; once they
// exchange pins, either auditor can produce a proof.
TEST(PairwiseAuditors, EquivocationIsProvableAfterExchange) {
  Deployment dep({{BackendKind::kSimA}, 1});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto fork = std::make_shared<sim::ScriptedDomain>(dep.backend(0), dep.descriptor().framework_digest,
                                                    equal_length_fork(dep, 2));
  auto desc = dep.descriptor();
  desc.release.reset();

  AuditOptions a_opt = dep.audit_options();
  AuditOptions b_opt;
  b_opt.concurrent = false;
  b_opt.connect = [&](const DomainSpec&) -> std::unique_ptr<node::DomainClient> {
    struct Forward : node::DomainClient {
      std::shared_ptr<sim::ScriptedDomain> s;
      node::StatusResponse status(ByteView n, std::optional<uint64_t> k) override { return s->status(n, k); }
      tlog::SignedHead update(const node::UpdateBundle& b) override { return s->update(b); }
      node::AppResult app_request(ByteView p) override { return s->app_request(p); }
      node::wire::IdentityResponse identity() override { return s->identity(); }
    };
    auto f = std::make_unique<Forward>();
    f->s = fork;
    return f;
  };

  auto a = audit(desc, {}, a_opt);
  auto b = audit(desc, {}, b_opt);
  EXPECT_TRUE(a.report.pass);
  EXPECT_TRUE(b.report.pass);

  auto proofs = cross_check_pins(desc, a.pins, b.pins);
  ASSERT_EQ(proofs.size(), 1u);
  EXPECT_TRUE(verify_misbehavior(proofs[0], dep.trust_roots(), dep.developer().public_key()));
  EXPECT_TRUE(cross_check_pins(desc, a.pins, a.pins).empty());

  // Auditing against the peer's pins also yields the proof directly.
  auto via_peer = audit(desc, b.pins, a_opt);
  EXPECT_FALSE(via_peer.report.pass);
  ASSERT_FALSE(via_peer.report.proofs.empty());
  EXPECT_TRUE(verify_misbehavior(via_peer.report.proofs[0], dep.trust_roots(), dep.developer().public_key()));
}

// Any single-byte change to an encoded proof makes it fail to decode or to
// verify.
TEST(ProofProperty, EveryByteMutationIsRejected) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 1});
  dep.release("counter_v1", 1);
  dep.release("counter_v2", 2);
  auto first = audit(dep.descriptor(), {}, dep.audit_options());
  dep.corrupt(0, Strategy::kForkedLog, rng());
  dep.corrupt(1, Strategy::kWrongDigest, rng());
  auto rep = audit(dep.descriptor(), first.pins, dep.audit_options()).report;
  ASSERT_GE(rep.proofs.size(), 2u);
  for (const auto& p : rep.proofs) {
    Bytes enc = p.encode();
    size_t accepted = 0;
    for (size_t i = 0; i < enc.size(); ++i) {
      for (uint8_t flip : {0x01, 0x80}) {
        Bytes m = enc;
        m[i] ^= flip;
        try {
          if (verify_misbehavior(MisbehaviorProof::decode(m), dep.trust_roots(), dep.developer().public_key())) {
            ++accepted;
          }
        } catch (const Error&) {
        }
      }
    }
    EXPECT_EQ(accepted, 0u) << to_string(p.kind());
  }
}

TEST(DetectionProperty, RandomizedAdversaries) {
  std::mt19937_64 r(7);
  int forks = 0;
  for (int i = 0; i < 150; ++i) {
    sim::ScenarioResult s = sim::run_scenario(r);
    ASSERT_TRUE(s.baseline_pass) << "run " << i;
    ASSERT_EQ(s.report.pass, s.expected_pass) << "run " << i << "\n" << report_text(s.report);
    if (s.fully_honest) {
      ASSERT_TRUE(s.report.pass);
    }
    if (s.attested_forks > 0) {
      ++forks;
      size_t eq = 0;
      for (const auto& p : s.report.proofs) {
        if (p.kind() == MisbehaviorProof::Kind::kEquivocation) {
          ++eq;
          EXPECT_TRUE(verify_misbehavior(p, s.descriptor.trust_roots, s.descriptor.developer_pk));
        }
      }
      EXPECT_EQ(eq, s.attested_forks);
    }
  }
  EXPECT_GT(forks, 10);
}

TEST(Descriptor, RoundTripAndValidation) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kNull}, 1});
  dep.release("echo", 1);
  auto desc = dep.descriptor();
  auto dir = std::filesystem::temp_directory_path() / ("dtrust_desc_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "roots.txt") << desc.trust_roots.serialize();
    std::ofstream(dir / "d.toml") << desc.serialize("roots.txt");
  }
  auto loaded = DeploymentDescriptor::load(dir / "d.toml");
  EXPECT_EQ(loaded.threshold, 1u);
  EXPECT_EQ(loaded.developer_pk, desc.developer_pk);
  EXPECT_EQ(loaded.framework_digest, desc.framework_digest);
  EXPECT_EQ(loaded.release, desc.release);
  ASSERT_EQ(loaded.domains.size(), 2u);
  EXPECT_EQ(loaded.domains[1].identity, desc.domains[1].identity);
  EXPECT_EQ(loaded.trust_roots.serialize(), desc.trust_roots.serialize());
  std::filesystem::remove_all(dir);

  auto bad = desc;
  bad.threshold = 3;
  EXPECT_THROW(bad.validate(), DescriptorError);
  bad.threshold = 0;
  EXPECT_THROW(bad.validate(), DescriptorError);
  bad = desc;
  bad.domains[1].domain_id = bad.domains[0].domain_id;
  EXPECT_THROW(bad.validate(), DescriptorError);
  bad = desc;
  bad.release->version = 9;
  EXPECT_THROW(bad.validate(), DescriptorError);

  std::string text = desc.serialize("");
  EXPECT_NO_THROW(DeploymentDescriptor::parse(text, "."));
  std::string mismatched = text;
  mismatched.replace(mismatched.find("backend = \"sim-a\""), 17, "backend = \"sim-b\"");
  EXPECT_THROW(DeploymentDescriptor::parse(mismatched, "."), DescriptorError);
  EXPECT_THROW(DeploymentDescriptor::parse("threshold = 1\n", "."), DescriptorError);
  EXPECT_THROW(DeploymentDescriptor::parse("threshold = [", "."), DescriptorError);
}

TEST(PinStoreFile, RoundTripAndMonotonicity) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 1});
  dep.release("echo", 1);
  PinStore pins = audit(dep.descriptor(), {}, dep.audit_options()).pins;
  auto path = std::filesystem::temp_directory_path() / ("dtrust_pins_" + std::to_string(::getpid()));
  EXPECT_TRUE(PinStore::load(path).empty());
  pins.save(path);
  EXPECT_EQ(PinStore::load(path), pins);
  std::filesystem::remove(path);

  Pin older = *pins.find("domain-0");
  older.head.head = tlog::LogHead::empty_log();
  EXPECT_THROW(pins.advance("domain-0", older), Error);
  EXPECT_THROW(PinStore::decode(Bytes{0x0b, 1}), DecodeError);
}

TEST(ReportJson, StableShape) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 2});
  dep.release("counter_v1", 1);
  dep.corrupt(1, Strategy::kWrongDigest, rng());
  auto rep = audit(dep.descriptor(), {}, dep.audit_options()).report;
  auto j = nlohmann::json::parse(report_json(rep));
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["threshold"], 2);
  EXPECT_EQ(j["n"], 2);
  EXPECT_EQ(j["valid_count"], 2);
  EXPECT_EQ(j["digest_agreement"], false);
  EXPECT_EQ(j["backend_kinds"]["sim-a"], 1);
  EXPECT_EQ(j["domains"][0]["status"], "valid");
  EXPECT_EQ(j["domains"][0]["log_seq"], 0);
  ASSERT_EQ(j["proofs"].size(), 1u);
  EXPECT_EQ(j["proofs"][0]["kind"], "digest-mismatch");
  auto proof = MisbehaviorProof::decode(from_hex(j["proofs"][0]["encoded"].get<std::string>()));
  EXPECT_TRUE(verify_misbehavior(proof, dep.trust_roots(), dep.developer().public_key()));

  auto c = nlohmann::json::parse(update_check_json(check_update(dep.descriptor(), {}, dep.audit_options())));
  EXPECT_EQ(c["result"], "no-change");
  EXPECT_TRUE(c["report"].is_object());
}

TEST(AuditOverTcp, ServersAndUnreachablePorts) {
  Deployment dep({{BackendKind::kSimA, BackendKind::kSimB}, 2});
  dep.release("echo", 1);
  node::TcpServer s0(dep.node(0), "127.0.0.1:0");
  node::TcpServer s1(dep.node(1), "127.0.0.1:0");
  s0.start();
  s1.start();
  auto desc = dep.descriptor();
  desc.domains[0].endpoint = s0.endpoint();
  desc.domains[1].endpoint = s1.endpoint();
  AuditOptions opt;
  opt.connect = tcp_connector(std::chrono::seconds(5));
  EXPECT_TRUE(audit(desc, {}, opt).report.pass);

  s1.stop();
  auto rep = audit(desc, {}, opt).report;
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(result(rep, "domain-1").status, DomainStatus::kUnreachable);
  s0.stop();
}

}  // namespace
}  // namespace dtrust::auditor
