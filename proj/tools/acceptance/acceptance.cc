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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Details for failures go to stderr.

#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dtrust/apps/catalog.h"
#include "dtrust/auditor/auditor.h"
#include "dtrust/auditor/misbehavior.h"
#include "dtrust/bench/bench.h"
#include "dtrust/canon/fileio.h"
#include "dtrust/demoapp/shamir.h"
#include "dtrust/node/release.h"
#include "dtrust/sandbox/assembler.h"
#include "dtrust/sandbox/state_store.h"
#include "dtrust/sim/scenario.h"
#include "dtrust/tlog/log.h"

namespace dtrust {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string summary;
};

// Collects failure details; the first few are echoed to stderr.
class Failures {
 public:
  explicit Failures(std::string label) : label_(std::move(label)) {}
  void add(const std::string& what) {
    if (count_++ < 10) std::cerr << "  [" << label_ << "] " << what << "\n";
  }
  size_t count() const { return count_; }

 private:
  std::string label_;
  size_t count_ = 0;
};

struct Options {
  size_t scenarios = 500;
  uint64_t seed = 20260101;
  std::string dtrust_exe;
  size_t bench_iterations = 1000;
  uint32_t bench_rounds = 16;
  uint64_t loop_budget_ms = 500;
};

// Runs a command, returning its exit status and combined output.
std::pair<int, std::string> run_command(const std::string& cmd) {
  std::string out;
  FILE* p = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return {-1, "popen failed"};
  std::array<char, 512> buf;
  while (size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// ---------------------------------------------------------------------------
// C1 and C2 share the scenario runs.

struct ScenarioStats {
  size_t runs = 0;
  size_t honest_runs = 0;
  size_t false_pass = 0;
  size_t false_fail = 0;
  double seconds = 0;

  size_t fork_domains = 0;
  size_t proofs_in_process = 0;
  size_t proofs_fresh_process = 0;
};

ScenarioStats run_scenarios(const Options& opt, const fs::path& work, Failures& c1, Failures& c2) {
  ScenarioStats st;
  std::mt19937_64 rng(opt.seed);
  struct PendingProof {
    fs::path proof, roots, dev;
    std::string label;
  };
  std::vector<PendingProof> pending;

  auto start = Clock::now();
  for (size_t run = 0; run < opt.scenarios; ++run) {
    sim::ScenarioResult r = sim::run_scenario(rng);
    ++st.runs;
    if (r.fully_honest) ++st.honest_runs;
    std::string label = "run " + std::to_string(run);
    if (!r.baseline_pass) {
      ++st.false_fail;
      c1.add(label + ": honest baseline audit failed");
    }
    if (r.report.pass && !r.expected_pass) {
      ++st.false_pass;
      c1.add(label + ": audit passed a deviating deployment");
    } else if (!r.report.pass && r.expected_pass) {
      ++st.false_fail;
      c1.add(label + ": audit failed an acceptable deployment");
    }

    if (r.attested_forks == 0) continue;
    fs::path dir = work / ("scenario-" + std::to_string(run));
    fs::create_directories(dir);
    fs::path roots = dir / "roots.txt";
    fs::path dev = dir / "developer.pub";
    write_file_atomic(roots, as_bytes(r.descriptor.trust_roots.serialize()));
    write_key_file(dev, r.descriptor.developer_pk.view());

    for (size_t i = 0; i < r.kinds.size(); ++i) {
      if (r.kinds[i] == attest::BackendKind::kNull || r.strategies[i] != sim::Strategy::kForkedLog) {
        continue;
      }
      ++st.fork_domains;
      const std::string id = r.descriptor.domains[i].domain_id;
      const PublicKey& att_pk = r.descriptor.domains[i].identity.attestation_pk;
      const auditor::MisbehaviorProof* found = nullptr;
      for (const auto& p : r.report.proofs) {
        if (p.domain_id() == id && p.kind() == auditor::MisbehaviorProof::Kind::kEquivocation) {
          found = &p;
          break;
        }
      }
      if (!found) {
        c2.add(label + ": no equivocation proof for forked " + id);
        continue;
      }
      // Rebuild the proof from the two captured heads and check both forms.
      const auto& eq = std::get<tlog::EquivocationProof>(found->evidence);
      bool ok = false;
      try {
        auto rebuilt = tlog::make_equivocation_proof(eq.a, eq.b, att_pk);
        auditor::MisbehaviorProof again{found->identity, rebuilt};
        ok = auditor::verify_misbehavior(*found, r.descriptor.trust_roots, r.descriptor.developer_pk) &&
             auditor::verify_misbehavior(again, r.descriptor.trust_roots, r.descriptor.developer_pk);
      } catch (const Error& e) {
        c2.add(label + ": " + e.what());
      }
      if (!ok) {
        c2.add(label + ": proof for " + id + " does not verify in process");
        continue;
      }
      ++st.proofs_in_process;
      fs::path file = dir / (id + ".proof");
      write_file_atomic(file, found->encode());
      pending.push_back({file, roots, dev, label + " " + id});
    }
  }
  st.seconds = seconds_since(start);

  for (const auto& p : pending) {
    if (opt.dtrust_exe.empty()) break;
    auto [code, out] = run_command(quote(opt.dtrust_exe) + " audit verify-proof " + quote(p.proof) +
                                   " --trust-roots " + quote(p.roots) + " --developer-pk " +
                                   quote(p.dev));
    if (code == 0 && out.rfind("VALID", 0) == 0) {
      ++st.proofs_fresh_process;
    } else {
      c2.add(p.label + ": fresh process said: " + out);
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// C3

Outcome check_tamper_evidence() {
  Failures f("C3");
  std::mt19937_64 rng(7);
  auto random_digest = [&] {
    std::array<uint8_t, 32> b;
    for (auto& x : b) x = static_cast<uint8_t>(rng());
    return Digest(b);
  };
  size_t mutations = 0, missed = 0;

  for (size_t n = 1; n <= 8; ++n) {
    tlog::HashChainLog log;
    for (size_t i = 0; i < n; ++i) {
      Signature sig;
      for (auto& x : sig.mutable_bytes()) x = static_cast<uint8_t>(rng());
      log.append(random_digest(), 10 * (i + 1) + rng() % 5, sig, 1700000000 + i);
    }
    const auto original = log.entries();
    const tlog::LogHead claimed = log.head();
    if (!tlog::verify_chain(original, claimed)) {
      f.add("unmodified chain of length " + std::to_string(n) + " rejected");
      ++missed;
      continue;
    }

    // Every mutation is applied to a fresh copy of one entry.
    std::vector<std::pair<std::string, std::function<void(tlog::LogEntry&)>>> edits;
    edits.push_back({"seq+1", [](auto& e) { ++e.seq; }});
    edits.push_back({"seq-1", [](auto& e) { --e.seq; }});
    edits.push_back({"seq^msb", [](auto& e) { e.seq ^= 1ull << 63; }});
    edits.push_back({"version+1", [](auto& e) { ++e.version; }});
    edits.push_back({"version-1", [](auto& e) { --e.version; }});
    edits.push_back({"version=0", [](auto& e) { e.version = 0; }});
    edits.push_back({"timestamp+1", [](auto& e) { ++e.timestamp; }});
    edits.push_back({"timestamp^msb", [](auto& e) { e.timestamp ^= 1ull << 63; }});
    for (size_t b = 0; b < 32; ++b) {
      edits.push_back({"prev_head[" + std::to_string(b) + "]", [b](auto& e) {
                         auto x = e.prev_head.bytes();
                         x[b] ^= 1;
                         e.prev_head = Digest(x);
                       }});
      edits.push_back({"code_digest[" + std::to_string(b) + "]", [b](auto& e) {
                         auto x = e.code_digest.bytes();
                         x[b] ^= 0x80;
                         e.code_digest = Digest(x);
                       }});
    }
    for (size_t b = 0; b < 64; ++b) {
      edits.push_back({"update_sig[" + std::to_string(b) + "]",
                       [b](auto& e) { e.update_sig.mutable_bytes()[b] ^= 1; }});
    }

    for (size_t i = 0; i < n; ++i) {
      for (const auto& [name, edit] : edits) {
        auto entries = original;
        edit(entries[i]);
        if (entries[i] == original[i]) continue;
        ++mutations;
        if (tlog::verify_chain(entries, claimed)) {
          ++missed;
          f.add("length " + std::to_string(n) + " entry " + std::to_string(i) + " " + name + " accepted");
        }
      }
    }
  }
  std::ostringstream s;
  s << mutations << " single-field mutations over chains of length 1..8, " << missed << " missed";
  return {missed == 0 && mutations > 0, s.str()};
}

// ---------------------------------------------------------------------------
// C4

uint64_t counter_of(const node::AppResult& r, uint8_t* version = nullptr) {
  if (r.status != node::AppStatus::kOk || r.output.size() != 9) return ~0ull;
  if (version) *version = r.output[0];
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(r.output[1 + i]) << (8 * i);
  return v;
}

Outcome check_update_protocol() {
  Failures f("C4");
  using attest::BackendKind;
  sim::Deployment dep({{BackendKind::kSimA, BackendKind::kSimB, BackendKind::kSimC}, 3});
  node::UpdateBundle v1 = dep.release("counter_v1", 1);
  auditor::PinStore pins = auditor::audit(dep.descriptor(), {}, dep.audit_options()).pins;

  std::vector<uint64_t> written(dep.n());
  std::vector<size_t> before(dep.n());
  for (size_t i = 0; i < dep.n(); ++i) {
    written[i] = 3 + i;
    for (uint64_t k = 0; k < written[i]; ++k) dep.node(i).app_request(as_bytes("+"));
    before[i] = dep.node(i).log_entries().size();
  }

  node::UpdateBundle v2 = dep.release("counter_v2", 2);
  bool a = true, b = true, c = true, d = true, e = true;

  for (size_t i = 0; i < dep.n(); ++i) {
    auto entries = dep.node(i).log_entries();
    if (entries.size() != before[i] + 1 || entries.back().code_digest != v2.app_digest() ||
        entries.back().version != 2) {
      a = false;
      f.add(dep.domain_id(i) + ": log did not grow by exactly the v2 entry");
    }
  }

  auditor::UpdateCheck uc = auditor::check_update(dep.descriptor(), pins, dep.audit_options());
  if (uc.kind != auditor::UpdateCheck::Kind::kUpdateObserved || uc.new_digest != v2.app_digest() ||
      uc.adoption.size() != dep.n()) {
    b = false;
    f.add(std::string("check_update reported ") + auditor::to_string(uc.kind));
  }
  for (const auto& [id, adoption] : uc.adoption) {
    if (adoption != auditor::Adoption::kAdopted) {
      b = false;
      f.add(id + ": " + auditor::to_string(adoption));
    }
  }

  for (size_t i = 0; i < dep.n(); ++i) {
    uint8_t version = 0;
    uint64_t value = counter_of(dep.node(i).app_request(as_bytes("g")), &version);
    if (version != 2 || value != written[i]) {
      c = false;
      f.add(dep.domain_id(i) + ": v2 read " + std::to_string(value) + " (version " +
            std::to_string(version) + "), expected " + std::to_string(written[i]));
    }
  }

  // Snapshot of everything an update must not change when rejected.
  auto snapshot = [&](size_t i) {
    return std::make_tuple(dep.node(i).log_entries(), dep.node(i).active_digest(),
                           counter_of(dep.node(i).app_request(as_bytes("g"))));
  };

  for (size_t i = 0; i < dep.n(); ++i) {
    auto state = snapshot(i);
    try {
      dep.node(i).apply_update(v1);
      d = false;
      f.add(dep.domain_id(i) + ": v1 replay accepted");
    } catch (const node::UpdateRejected& ex) {
      if (ex.reason() != node::UpdateRejected::Reason::kRollback) {
        d = false;
        f.add(dep.domain_id(i) + ": v1 replay rejected for the wrong reason: " + ex.what());
      }
    }
    if (snapshot(i) != state) {
      d = false;
      f.add(dep.domain_id(i) + ": v1 replay changed node state");
    }
  }

  SigningKey wrong = SigningKey::generate();
  node::UpdateBundle forged = node::sign_update(wrong, apps::bundle("echo").code, 3);
  for (size_t i = 0; i < dep.n(); ++i) {
    auto state = snapshot(i);
    try {
      dep.node(i).apply_update(forged);
      e = false;
      f.add(dep.domain_id(i) + ": wrong-key update accepted");
    } catch (const node::UpdateRejected& ex) {
      if (ex.reason() != node::UpdateRejected::Reason::kSignature) {
        e = false;
        f.add(dep.domain_id(i) + ": wrong-key update rejected for the wrong reason: " + ex.what());
      }
    }
    if (snapshot(i) != state) {
      e = false;
      f.add(dep.domain_id(i) + ": wrong-key update changed node state");
    }
  }
  if (auditor::check_update(dep.descriptor(), uc.pins, dep.audit_options()).kind !=
      auditor::UpdateCheck::Kind::kNoChange) {
    e = false;
    f.add("rejected updates were visible to check_update");
  }

  auto mark = [](char label, bool ok) { return std::string(1, label) + (ok ? "=ok" : "=FAIL"); };
  std::ostringstream s;
  s << "3 domains counter v1->v2: " << mark('a', a) << " " << mark('b', b) << " " << mark('c', c) << " "
    << mark('d', d) << " " << mark('e', e);
  return {a && b && c && d && e, s.str()};
}

// ---------------------------------------------------------------------------
// C5

class Mt19937Random : public demoapp::RandomSource {
 public:
  explicit Mt19937Random(uint64_t seed) : gen_(seed) {}
  void fill(std::span<uint8_t> out) override {
    for (auto& b : out) b = static_cast<uint8_t>(gen_());
  }

 private:
  std::mt19937_64 gen_;
};

class FixedRandom : public demoapp::RandomSource {
 public:
  explicit FixedRandom(uint8_t value) : value_(value) {}
  void fill(std::span<uint8_t> out) override { std::fill(out.begin(), out.end(), value_); }

 private:
  uint8_t value_;
};

void for_each_subset(size_t n, size_t k, const std::function<void(const std::vector<size_t>&)>& fn) {
  std::vector<size_t> idx(k);
  for (size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Outcome check_shamir() {
  Failures f("C5");
  auto start = Clock::now();
  std::mt19937 gen(31337);
  Mt19937Random rng(4242);
  size_t cases = 0, wrong = 0;
  while (cases < 1000) {
    unsigned n = 1 + gen() % 10;
    unsigned t = 1 + gen() % n;
    Bytes secret(1 + gen() % 64);
    rng.fill(secret);
    auto shares = demoapp::split(secret, t, n, rng);
    for_each_subset(n, t, [&](const std::vector<size_t>& idx) {
      std::vector<demoapp::Share> pick;
      for (size_t i : idx) pick.push_back(shares[i]);
      std::shuffle(pick.begin(), pick.end(), gen);
      ++cases;
      if (demoapp::recover(pick) != secret) {
        ++wrong;
        f.add("t=" + std::to_string(t) + " n=" + std::to_string(n) + " subset failed to recover");
      }
    });
  }

  // t = 2: a share's byte is s + a*x. Over all 256 coefficients a, each share
  // value must occur exactly once for every secret byte s and every x.
  size_t nonuniform = 0;
  for (int s = 0; s < 256; ++s) {
    std::vector<std::array<uint16_t, 256>> count(255);
    for (int a = 0; a < 256; ++a) {
      FixedRandom fixed(static_cast<uint8_t>(a));
      auto shares = demoapp::split(Bytes{static_cast<uint8_t>(s)}, 2, 255, fixed);
      for (const auto& share : shares) ++count[share.x - 1][share.y[0]];
    }
    for (size_t x = 0; x < count.size(); ++x) {
      if (std::any_of(count[x].begin(), count[x].end(), [](uint16_t c) { return c != 1; })) {
        ++nonuniform;
        f.add("x=" + std::to_string(x + 1) + " s=" + std::to_string(s) + " not uniform");
      }
    }
  }
  double secs = seconds_since(start);
  std::ostringstream s;
  s << cases << " subset recoveries (" << wrong << " wrong), t=2 uniformity exact over 255x256 (x,s) "
    << "with " << nonuniform << " deviations, " << secs << " s";
  return {wrong == 0 && nonuniform == 0 && cases >= 1000 && secs < 60, s.str()};
}

// ---------------------------------------------------------------------------
// C6

Outcome check_containment(const Options& opt) {
  Failures f("C6");
  using namespace sandbox;
  std::vector<Engine> engines{Engine::kInterpreter};
  if (aot_available()) engines.push_back(Engine::kAot);

  const char* forbidden[] = {"fs_open", "fs_write", "net_connect", "net_listen", "proc_exec",
                             "proc_fork", "getenv", "clock_gettime", "random_bytes", "syscall"};
  const char* traps[] = {
      "const r1, 0x7fffffff\n  load8 r0, r1, 0",
      "const r1, -1\n  load64 r0, r1, 0",
      "const r1, 4096\n  store8 r1, r1, 0",
      "const r1, 0\n  const r2, 4000\n  const r3, 200\n  memcopy r1, r2, r3",
      "const r1, 0x10000000000\n  memgrow r0, r1",
      "const r1, 0x100000\n  const r2, 4\n  host r0, response_write, r1",
      "const r1, 0\n  const r2, 4\n  const r3, 5000\n  const r4, 16\n  host r0, store_get, r1",
      "const r1, 0\n  const r2, 2048\n  host r0, store_delete, r1",
      "unreachable",
  };

  size_t probes = 0, escaped = 0;
  std::ostringstream timing;
  bool timing_ok = true;
  for (Engine engine : engines) {
    LoadOptions lo;
    lo.engine = engine;
    SandboxLimits limits;
    limits.max_memory_bytes = 4 << 20;

    for (const char* sym : forbidden) {
      ++probes;
      std::string src = std::string(".import ") + sym + "\n.func handle\n  host r0, " + sym +
                        ", r1\n  ret r0\n";
      MemoryStore store;
      try {
        load(AppBundle::from_code(assemble(src)), limits, store, lo);
        ++escaped;
        f.add(std::string(to_string(engine)) + ": import " + sym + " loaded");
      } catch (const ForbiddenImport&) {
      } catch (const Error& e) {
        ++escaped;
        f.add(std::string(sym) + ": unexpected error " + e.what());
      }
    }

    for (const char* body : traps) {
      ++probes;
      std::string src = std::string(
                            ".memory 4096\n.import request_read\n.import response_write\n"
                            ".import store_get\n.import store_put\n.import store_delete\n"
                            ".func handle regs=8\n  ") +
                        body + "\n  ret r0\n";
      MemoryStore store;
      auto inst = load(AppBundle::from_code(assemble(src)), limits, store, lo);
      try {
        inst->handle(as_bytes("abcd"));
        ++escaped;
        f.add(std::string(to_string(engine)) + ": probe ran to completion: " + body);
      } catch (const SandboxError&) {
      }
      if (store.size() != 0) {
        ++escaped;
        f.add(std::string(to_string(engine)) + ": probe wrote to the store: " + body);
      }
    }

    MemoryStore store;
    SandboxLimits loop_limits;
    loop_limits.max_millis_per_request = opt.loop_budget_ms;
    auto inst = load(apps::bundle("faulty"), loop_limits, store, lo);
    auto start = Clock::now();
    bool timed_out = false;
    try {
      inst->handle(as_bytes("l"));
    } catch (const Timeout&) {
      timed_out = true;
    } catch (const SandboxError& e) {
      f.add(std::string("loop raised ") + e.what());
    }
    double ms = seconds_since(start) * 1000;
    double budget = static_cast<double>(opt.loop_budget_ms);
    bool within = timed_out && ms >= 0.8 * budget && ms <= 1.2 * budget;
    bool next_ok = false;
    try {
      next_ok = dtrust::to_string(inst->handle(as_bytes("ok?"))) == "ok";
    } catch (const Error& e) {
      f.add(std::string("request after timeout failed: ") + e.what());
    }
    if (!within) f.add(std::string(to_string(engine)) + ": loop stopped after " + std::to_string(ms) + " ms");
    if (!next_ok) f.add(std::string(to_string(engine)) + ": next request did not succeed");
    timing_ok = timing_ok && within && next_ok;
    timing << " " << to_string(engine) << " loop " << static_cast<int>(ms) << "/" << opt.loop_budget_ms
           << " ms" << (next_ok ? " then ok" : " then FAILED") << ";";
  }
  std::ostringstream s;
  s << probes << " probes, " << escaped << " escaped;" << timing.str();
  std::string summary = s.str();
  summary.pop_back();
  return {escaped == 0 && timing_ok, summary};
}

// ---------------------------------------------------------------------------
// C7

Outcome check_bench(const Options& opt) {
  bench::BenchOptions bo;
  bo.iterations = opt.bench_iterations;
  bench::BenchReport rep = bench::run_bench(bench::gf_share_workload(opt.bench_rounds), bo);
  std::cerr << bench::bench_table(rep);
  double native = rep.rows.empty() ? 0 : rep.rows.front().median_us;
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << rep.workload << " x" << bo.iterations << ": native " << native << " us, " << rep.gated_environment
    << " " << rep.gated_overhead << "x (limit " << rep.max_overhead << "x), outputs "
    << (rep.outputs_equal ? "equal" : "DIFFER");
  s.precision(1);
  s << "; reference sandbox overhead " << bench::kReferenceSandboxOverhead * 100 << "% (not gated)";
  bool iterations_ok = std::all_of(rep.rows.begin(), rep.rows.end(),
                                   [&](const bench::Row& r) { return r.iterations >= 1000; });
  return {rep.pass && rep.outputs_equal && iterations_ok, s.str()};
}

void print(int id, const char* name, const Outcome& o) {
  std::cout << "C" << id << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.summary
            << std::endl;
}

int run(const Options& opt) {
  fs::path work = fs::temp_directory_path() / ("dtrust-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(work);

  Failures f1("C1"), f2("C2");
  ScenarioStats st = run_scenarios(opt, work, f1, f2);
  std::ostringstream s1;
  s1 << st.runs << " deployments (" << st.honest_runs << " fully honest): " << st.false_pass
     << " false passes, " << st.false_fail << " false fails, " << st.seconds << " s";
  Outcome c1{st.runs >= 500 && st.false_pass == 0 && st.false_fail == 0 && st.seconds < 120, s1.str()};

  std::ostringstream s2;
  s2 << st.fork_domains << " forked attested domains: " << st.proofs_in_process << " proofs verified in process, "
     << st.proofs_fresh_process << " in a fresh process";
  if (opt.dtrust_exe.empty()) s2 << " (no --dtrust given)";
  Outcome c2{st.fork_domains > 0 && st.proofs_in_process == st.fork_domains &&
                 st.proofs_fresh_process == st.fork_domains && f2.count() == 0,
             s2.str()};

  Outcome outcomes[] = {c1,
                        c2,
                        check_tamper_evidence(),
                        check_update_protocol(),
                        check_shamir(),
                        check_containment(opt),
                        check_bench(opt)};
  const char* names[] = {"audit detection",  "equivocation proofs", "log tamper evidence",
                         "update protocol",  "shamir sharing",      "sandbox containment",
                         "benchmark"};
  bool all = true;
  for (int i = 0; i < 7; ++i) {
    print(i + 1, names[i], outcomes[i]);
    all = all && outcomes[i].pass;
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  return all ? 0 : 1;
}

}  // namespace
}  // namespace dtrust

int main(int argc, char** argv) {
  dtrust::Options opt;
  CLI::App app{"Runs the acceptance criteria and prints one line per criterion"};
  app.add_option("--dtrust", opt.dtrust_exe, "Path to the dtrust binary, for fresh-process proof checks");
  app.add_option("--scenarios", opt.scenarios, "Randomized deployments to audit");
  app.add_option("--seed", opt.seed, "Seed for the scenario generator");
  app.add_option("--bench-iterations", opt.bench_iterations, "Benchmark iterations");
  app.add_option("--bench-rounds", opt.bench_rounds, "Benchmark workload rounds per request");
  app.add_option("--loop-budget-ms", opt.loop_budget_ms, "Time budget for the infinite-loop probe");
  CLI11_PARSE(app, argc, argv);
  try {
    return dtrust::run(opt);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }
}
