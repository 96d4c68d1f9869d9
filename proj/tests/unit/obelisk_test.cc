// Copyright 2026 The mpcpipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <functional>
#include <set>
#include <mutex>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "mpcpipe/obelisk/orchestrator.h"

using namespace mpcpipe;
using namespace mpcpipe::obelisk;
using nlohmann::json;

namespace {

class FakeDispatch : public PartyDispatch {
 public:
  bool dispatch(int party, const party::Job& job) override {
    std::lock_guard lk(mu);
    if (down.count(party)) return false;
    sent.push_back({party, job});
    return true;
  }
  std::vector<party::Job> jobs_for(int party) {
    std::lock_guard lk(mu);
    std::vector<party::Job> out;
    for (const auto& [p, j] : sent) {
      if (p == party) out.push_back(j);
    }
    return out;
  }
  std::mutex mu;
  std::vector<std::pair<int, party::Job>> sent;
  std::set<int> down;
};

const Principal kAlice = Principal::of_user("alice");
const Principal kBob = Principal::of_user("bob");
const Principal kP1 = Principal::of_party(1), kP2 = Principal::of_party(2), kP3 = Principal::of_party(3);
const Principal kParties[] = {kP1, kP2, kP3};

Bytes record(uint64_t seed, size_t n = 1524) {
  std::mt19937_64 rng(seed);
  Bytes b(n);
  for (auto& x : b) x = static_cast<uint8_t>(rng());
  return b;
}

json envelopes(size_t n = 256) {
  json e = json::array();
  for (int i = 0; i < 3; ++i) e.push_back(base64_encode(record(100 + i, n)));
  return e;
}

json adhoc_req(std::vector<uint64_t> ids) {
  return {{"mode", "adhoc"}, {"type", "ecg"}, {"data_ids", ids}, {"envelopes", envelopes()}};
}

json stream_req(uint64_t tb, uint64_t te, uint64_t b) {
  return {{"mode", "stream"}, {"type", "ecg"}, {"t_begin", tb}, {"t_end", te}, {"batch_size", b},
          {"envelopes", envelopes()}};
}

json result(const Bytes& ct, int party) { return {{"party", party}, {"ct", base64_encode(ct)}}; }

int status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ApiError& e) {
    return e.status();
  }
  return 200;
}

struct Fixture {
  ObeliskConfig cfg;
  std::shared_ptr<FakeDispatch> fake = std::make_shared<FakeDispatch>();
  std::unique_ptr<Orchestrator> o;
  uint64_t now = 1'000'000;

  Fixture() {
    cfg.max_stream_batch = 8;
    cfg.job_timeout = std::chrono::seconds(60);
    o = std::make_unique<Orchestrator>(cfg, fake);
  }
  void ingest(const Principal& who, uint64_t ts) { o->ingest(who, ts, record(ts), now); }
  void settle(uint64_t dt = 100) {
    now += dt;
    o->step(now);
  }
  std::string state(const std::string& id) { return o->get_analysis(kAlice, id)["state"]; }
};

}  // namespace

TEST_CASE("ingest: size, duplicates, eventual visibility") {
  Fixture f;
  f.ingest(kAlice, 1);
  CHECK(status_of([&] { f.o->ingest(kAlice, 2, record(2, 1523), f.now); }) == 400);
  CHECK(status_of([&] { f.o->ingest(kAlice, 1, record(1), f.now); }) == 409);
  CHECK(status_of([&] { f.o->ingest(kP1, 3, record(3), f.now); }) == 403);
  f.ingest(kBob, 1);  // timestamps are unique per user only
  // Acknowledged but not yet committed.
  CHECK(f.o->list_samples(kAlice).empty());
  CHECK(status_of([&] { f.o->request_analysis(kAlice, adhoc_req({1}), f.now); }) == 404);
  f.settle();
  CHECK(f.o->list_samples(kAlice) == std::vector<uint64_t>{1});
}

TEST_CASE("request_analysis validation and ownership") {
  Fixture f;
  f.ingest(kAlice, 10);
  f.ingest(kBob, 20);
  f.settle();
  CHECK(status_of([&] { f.o->request_analysis(kAlice, adhoc_req({20}), f.now); }) == 403);
  CHECK(status_of([&] { f.o->request_analysis(kAlice, adhoc_req({99}), f.now); }) == 404);
  CHECK(status_of([&] { f.o->request_analysis(kAlice, stream_req(10, 9, 4), f.now); }) == 400);
  CHECK(status_of([&] { f.o->request_analysis(kP1, adhoc_req({10}), f.now); }) == 403);
  auto bad_env = adhoc_req({10});
  bad_env["envelopes"] = envelopes(255);
  CHECK(status_of([&] { f.o->request_analysis(kAlice, bad_env, f.now); }) == 400);
  auto two = adhoc_req({10});
  two["parties"] = {1, 2};
  CHECK(status_of([&] { f.o->request_analysis(kAlice, two, f.now); }) == 400);
  auto missing = adhoc_req({10});
  missing.erase("type");
  CHECK(status_of([&] { f.o->request_analysis(kAlice, missing, f.now); }) == 400);
  auto id = f.o->request_analysis(kAlice, adhoc_req({10}), f.now);
  CHECK(f.state(id) == "queued");
  auto sid = f.o->request_analysis(kAlice, stream_req(0, 1'000'000'000, 1000), f.now);
  CHECK(f.o->get_analysis(kAlice, sid)["batch_size"] == 8);  // platform cap
}

TEST_CASE("dispatch and 2-of-3 agreement") {
  Fixture f;
  for (uint64_t ts = 1; ts <= 4; ++ts) f.ingest(kAlice, ts);
  f.settle();
  Bytes good = record(500, 56), other = record(501, 56), third = record(502, 56);

  SUBCASE("three identical") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    CHECK(f.state(id) == "running");
    REQUIRE(f.fake->jobs_for(1).size() == 1);
    CHECK(f.fake->jobs_for(2)[0].analyses[0].id == id);
    for (int p = 1; p <= 3; ++p) f.o->accept_result(kParties[p - 1], id, result(good, p), f.now);
    CHECK(f.state(id) == "done");
    auto r = f.o->get_result(kAlice, id);
    CHECK(base64_decode(r["ct"].get<std::string>()) == good);
    CHECK(r["flags"].empty());
    CHECK(status_of([&] { f.o->get_result(kBob, id); }) == 403);
  }
  SUBCASE("two identical and one corrupted") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    f.o->accept_result(kP3, id, result(other, 3), f.now);
    f.o->accept_result(kP1, id, result(good, 1), f.now);
    CHECK(f.state(id) == "running");
    f.o->accept_result(kP2, id, result(good, 2), f.now);
    CHECK(f.state(id) == "done");
    auto r = f.o->get_result(kAlice, id);
    CHECK(base64_decode(r["ct"].get<std::string>()) == good);
    CHECK(r["flags"] == json::array({"misbehavior:party-3"}));
  }
  SUBCASE("corrupted result arriving after finalization") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    f.o->accept_result(kP1, id, result(good, 1), f.now);
    f.o->accept_result(kP2, id, result(good, 2), f.now);
    auto late = f.o->accept_result(kP3, id, result(other, 3), f.now);
    CHECK(late["status"] == "ignored");
    CHECK(f.o->get_result(kAlice, id)["flags"] == json::array({"misbehavior:party-3"}));
  }
  SUBCASE("pairwise distinct") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    f.o->accept_result(kP1, id, result(good, 1), f.now);
    f.o->accept_result(kP2, id, result(other, 2), f.now);
    f.o->accept_result(kP3, id, result(third, 3), f.now);
    CHECK(f.state(id) == "failed");
    CHECK(f.o->get_analysis(kAlice, id)["code"] == "no-agreement");
  }
  SUBCASE("party failures") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    f.o->accept_result(kP1, id, {{"party", 1}, {"error", "consent-context-mismatch"}}, f.now);
    f.o->accept_result(kP2, id, result(good, 2), f.now);
    CHECK(f.state(id) == "running");
    f.o->accept_result(kP3, id, {{"party", 3}, {"error", "peer-refused"}}, f.now);
    CHECK(f.state(id) == "failed");
    CHECK(f.o->get_analysis(kAlice, id)["code"] == "consent-context-mismatch");
  }
  SUBCASE("submission rules") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1, 2}), f.now);
    CHECK(status_of([&] { f.o->accept_result(kP1, id, result(good, 1), f.now); }) == 409);  // still queued
    f.settle();
    CHECK(status_of([&] { f.o->accept_result(kP1, id, result(good, 1), f.now); }) == 400);  // 2 rows need 96 bytes
    CHECK(status_of([&] { f.o->accept_result(kP2, id, result(record(1, 96), 1), f.now); }) == 403);
    CHECK(status_of([&] { f.o->accept_result(kAlice, id, result(record(1, 96), 1), f.now); }) == 403);
    f.o->accept_result(kP1, id, result(record(1, 96), 1), f.now);
    CHECK(f.o->accept_result(kP1, id, result(record(1, 96), 1), f.now)["status"] == "ignored");
  }
}

TEST_CASE("one job in flight; queued analyses aggregate") {
  Fixture f;
  for (uint64_t ts = 1; ts <= 6; ++ts) f.ingest(kAlice, ts);
  f.ingest(kBob, 1);
  f.settle();
  auto a = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
  f.settle();
  auto b = f.o->request_analysis(kAlice, adhoc_req({2, 3}), f.now);
  auto c = f.o->request_analysis(kBob, {{"type", "ecg"}, {"data_ids", {1}}, {"envelopes", envelopes()}}, f.now);
  f.settle();
  CHECK(f.state(b) == "queued");
  CHECK(f.fake->jobs_for(1).size() == 1);
  Bytes ct = record(7, 56);
  for (int p = 1; p <= 3; ++p) f.o->accept_result(kParties[p - 1], a, result(ct, p), f.now);
  f.settle();
  auto jobs = f.fake->jobs_for(1);
  REQUIRE(jobs.size() == 2);
  CHECK(jobs[1].analyses.size() == 2);  // b and c, two users in one vectorized job
  CHECK(jobs[1].analyses[0].id == b);
  CHECK(jobs[1].analyses[1].id == c);
  CHECK(f.o->stats().max_in_flight == 1);

  auto meta = f.o->get_analysis(kAlice, a);
  CHECK(meta["submitted_ms"] <= meta["dispatched_ms"]);
  CHECK(meta["dispatched_ms"] <= meta["stored_ms"]);
}

TEST_CASE("key store access") {
  Fixture f;
  f.ingest(kAlice, 1);
  f.settle();
  auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
  f.settle();
  CHECK(f.o->get_keyshare(kP1, id, 1) == record(100, 256));
  CHECK(f.o->get_keyshare(kP3, id, 3) == record(102, 256));
  CHECK(status_of([&] { f.o->get_keyshare(kP2, id, 1); }) == 403);
  CHECK(status_of([&] { f.o->get_keyshare(kAlice, id, 1); }) == 403);
  CHECK(status_of([&] { f.o->get_keyshare(kP1, "nope", 1); }) == 404);
  Bytes ct = record(7, 56);
  for (int p = 1; p <= 3; ++p) f.o->accept_result(kParties[p - 1], id, result(ct, p), f.now);
  CHECK(status_of([&] { f.o->get_keyshare(kP1, id, 1); }) == 410);

  SUBCASE("TTL expiry") {
    f.cfg.keyshare_ttl = std::chrono::seconds(5);
    f.o = std::make_unique<Orchestrator>(f.cfg, f.fake);
    f.ingest(kAlice, 2);
    f.settle();
    auto id2 = f.o->request_analysis(kAlice, adhoc_req({2}), f.now);
    f.settle();
    CHECK(f.o->get_keyshare(kP1, id2, 1).size() == 256);
    f.settle(6000);
    CHECK(status_of([&] { f.o->get_keyshare(kP1, id2, 1); }) == 410);
  }
}

TEST_CASE("data access is limited to running analyses") {
  Fixture f;
  f.ingest(kAlice, 1);
  f.ingest(kAlice, 2);
  f.settle();
  auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
  CHECK(status_of([&] { f.o->get_data(kP1, "alice", {1}); }) == 403);  // queued, not running
  f.settle();
  auto recs = f.o->get_data(kP1, "alice", {1});
  REQUIRE(recs.size() == 1);
  CHECK(*recs[0] == record(1));
  CHECK(status_of([&] { f.o->get_data(kP1, "alice", {2}); }) == 403);
  CHECK(status_of([&] { f.o->get_data(kAlice, "alice", {1}); }) == 403);
  (void)id;
}

TEST_CASE("micro-batching") {
  Fixture f;
  f.cfg.flush_interval = std::chrono::milliseconds(2000);

  SUBCASE("B=4 with 4 arrivals gives one job of 4") {
    auto s = f.o->request_analysis(kAlice, stream_req(0, 1ull << 50, 4), f.now);
    for (uint64_t ts = 1; ts <= 4; ++ts) f.ingest(kAlice, ts);
    f.settle();
    auto jobs = f.fake->jobs_for(1);
    REQUIRE(jobs.size() == 1);
    REQUIRE(jobs[0].analyses.size() == 1);
    const auto& a = jobs[0].analyses[0];
    CHECK(a.id == s + "-b0");
    CHECK(a.data_ids == std::vector<uint64_t>{1, 2, 3, 4});
    CHECK(a.mode == party::Mode::kStream);
    CHECK(a.t_end == (1ull << 50));
    // Batches fetch the registration's envelopes.
    CHECK(f.o->get_keyshare(kP2, a.id, 2) == record(101, 256));
  }
  SUBCASE("B=4 with 3 arrivals flushes after the interval") {
    auto s = f.o->request_analysis(kAlice, stream_req(0, 1ull << 50, 4), f.now);
    for (uint64_t ts = 1; ts <= 3; ++ts) f.ingest(kAlice, ts);
    f.settle();
    CHECK(f.fake->jobs_for(1).empty());
    f.settle(1000);
    CHECK(f.fake->jobs_for(1).empty());
    f.settle(1100);
    auto jobs = f.fake->jobs_for(1);
    REQUIRE(jobs.size() == 1);
    CHECK(jobs[0].analyses[0].data_ids.size() == 3);
    (void)s;
  }
  SUBCASE("two users streaming share one job; every record in exactly one job") {
    auto sa = f.o->request_analysis(kAlice, stream_req(0, 1ull << 50, 2), f.now);
    auto sb = f.o->request_analysis(kBob, stream_req(0, 1ull << 50, 2), f.now);
    for (uint64_t ts = 1; ts <= 2; ++ts) {
      f.ingest(kAlice, ts);
      f.ingest(kBob, ts);
    }
    f.settle();
    auto jobs = f.fake->jobs_for(1);
    REQUIRE(jobs.size() == 1);
    REQUIRE(jobs[0].analyses.size() == 2);
    std::set<std::string> users{jobs[0].analyses[0].user, jobs[0].analyses[1].user};
    CHECK(users == std::set<std::string>{"alice", "bob"});

    // More arrivals while the first job is in flight wait for it.
    for (uint64_t ts = 3; ts <= 8; ++ts) f.ingest(kAlice, ts);
    f.settle();
    CHECK(f.fake->jobs_for(1).size() == 1);
    for (const auto& a : jobs[0].analyses) {
      Bytes ct = record(9, 16 + 40 * a.data_ids.size());
      for (int p = 1; p <= 3; ++p) f.o->accept_result(kParties[p - 1], a.id, result(ct, p), f.now);
    }
    f.settle();
    f.settle(3000);
    std::multiset<uint64_t> alice_ids;
    for (const auto& j : f.fake->jobs_for(1)) {
      for (const auto& a : j.analyses) {
        if (a.user == "alice") alice_ids.insert(a.data_ids.begin(), a.data_ids.end());
      }
    }
    CHECK(alice_ids == std::multiset<uint64_t>{1, 2, 3, 4, 5, 6, 7, 8});
    auto kids = f.o->get_analysis(kAlice, sa)["children"];
    CHECK(kids.size() == 4);
    (void)sb;
  }
  SUBCASE("records outside the window are stored but not dispatched") {
    f.o->request_analysis(kAlice, stream_req(100, 200, 1), f.now);
    f.ingest(kAlice, 50);
    f.ingest(kAlice, 300);
    f.settle(5000);
    CHECK(f.fake->jobs_for(1).empty());
    CHECK(f.o->list_samples(kAlice).size() == 2);
  }
  SUBCASE("window end closes the registration and drops its envelopes") {
    auto s = f.o->request_analysis(kAlice, stream_req(0, f.now + 1000, 4), f.now);
    f.settle(2000);
    CHECK(f.o->get_analysis(kAlice, s)["state"] == "closed");
    f.settle();
    CHECK(status_of([&] { f.o->get_keyshare(kP1, s, 1); }) == 410);
  }
}

TEST_CASE("timeouts and unreachable parties") {
  Fixture f;
  f.cfg.job_timeout = std::chrono::seconds(10);
  f.o = std::make_unique<Orchestrator>(f.cfg, f.fake);
  f.ingest(kAlice, 1);
  f.ingest(kAlice, 2);
  f.settle();

  SUBCASE("job timeout") {
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    auto id2 = f.o->request_analysis(kAlice, adhoc_req({2}), f.now);
    f.settle(11'000);
    CHECK(f.state(id) == "failed");
    CHECK(f.o->get_analysis(kAlice, id)["code"] == "timeout");
    f.settle();
    CHECK(f.state(id2) == "running");
  }
  SUBCASE("party offline at dispatch") {
    f.fake->down.insert(3);
    auto id = f.o->request_analysis(kAlice, adhoc_req({1}), f.now);
    f.settle();
    CHECK(f.state(id) == "failed");
    CHECK(f.o->get_analysis(kAlice, id)["code"] == "dispatch-failed");
    CHECK(!f.o->get_result(kAlice, id).contains("ct"));
    // The reachable parties report their network failures; the job then closes.
    f.o->accept_result(kP1, id, {{"party", 1}, {"error", "network-error"}}, f.now);
    f.o->accept_result(kP2, id, {{"party", 2}, {"error", "network-error"}}, f.now);
    f.fake->down.clear();
    auto id2 = f.o->request_analysis(kAlice, adhoc_req({2}), f.now);
    f.settle();
    CHECK(f.state(id2) == "running");
  }
}

TEST_CASE("restarting between every call leaves outcomes unchanged") {
  auto dir = std::filesystem::temp_directory_path() / ("mpcpipe_obelisk_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  ObeliskConfig cfg;
  cfg.data_db = (dir / "data.db").string();
  cfg.key_db = (dir / "keys.db").string();
  cfg.meta_db = (dir / "meta.db").string();
  auto fake = std::make_shared<FakeDispatch>();
  uint64_t now = 5'000'000;
  auto fresh = [&] { return std::make_unique<Orchestrator>(cfg, fake); };

  fresh()->ingest(kAlice, 1, record(1), now);
  fresh()->ingest(kAlice, 2, record(2), now);
  now += 100;
  fresh()->step(now);
  std::string id = fresh()->request_analysis(kAlice, adhoc_req({1, 2}), now);
  std::string sid = fresh()->request_analysis(kAlice, stream_req(0, 1ull << 50, 2), now);
  fresh()->step(now += 100);
  CHECK(fresh()->get_analysis(kAlice, id)["state"] == "running");
  CHECK(fresh()->get_keyshare(kP2, id, 2) == record(101, 256));
  CHECK(fresh()->get_data(kP3, "alice", {1, 2})[1] == record(2));
  Bytes ct = record(3, 96);
  fresh()->accept_result(kP1, id, result(ct, 1), now);
  fresh()->accept_result(kP3, id, result(record(4, 96), 3), now);
  fresh()->accept_result(kP2, id, result(ct, 2), now);
  auto r = fresh()->get_result(kAlice, id);
  CHECK(r["state"] == "done");
  CHECK(base64_decode(r["ct"].get<std::string>()) == ct);
  CHECK(r["flags"] == json::array({"misbehavior:party-3"}));
  // Stream pending rows survive restarts as well.
  fresh()->ingest(kAlice, 3, record(3), now);
  fresh()->step(now += 100);
  fresh()->ingest(kAlice, 4, record(4), now);
  fresh()->step(now += 100);
  fresh()->step(now += 100);
  auto kids = fresh()->get_analysis(kAlice, sid)["children"];
  REQUIRE(kids.size() == 1);
  CHECK(fresh()->get_analysis(kAlice, kids[0])["data_ids"] == json::array({3, 4}));
  std::filesystem::remove_all(dir);
}
