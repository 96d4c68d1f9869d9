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

#include "mpcpipe/obelisk/orchestrator.h"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

#include "mpcpipe/aesgcm/dist.h"
#include "mpcpipe/common/crypto.h"
#include "mpcpipe/common/error.h"
#include "mpcpipe/obelisk/db.h"
#include "mpcpipe/party/context.h"

namespace mpcpipe::obelisk {

using nlohmann::json;

namespace {

constexpr const char* kDataSchema = R"(
CREATE TABLE IF NOT EXISTS samples (
  user TEXT NOT NULL, ts INTEGER NOT NULL, record BLOB NOT NULL,
  ingest_ms INTEGER NOT NULL, visible INTEGER NOT NULL DEFAULT 0,
  PRIMARY KEY (user, ts));
)";

constexpr const char* kKeySchema = R"(
CREATE TABLE IF NOT EXISTS keyshares (
  id TEXT NOT NULL, party INTEGER NOT NULL, envelope BLOB NOT NULL, expires_ms INTEGER NOT NULL,
  PRIMARY KEY (id, party));
)";

constexpr const char* kMetaSchema = R"(
CREATE TABLE IF NOT EXISTS analyses (
  id TEXT PRIMARY KEY, requester TEXT NOT NULL, mode TEXT NOT NULL, type TEXT NOT NULL,
  data_ids TEXT NOT NULL, t_begin INTEGER, t_end INTEGER, batch_size INTEGER, parties TEXT NOT NULL,
  state TEXT NOT NULL, code TEXT, parent TEXT, job_id TEXT, batches INTEGER NOT NULL DEFAULT 0,
  submitted_ms INTEGER, dispatched_ms INTEGER, stored_ms INTEGER,
  first_ingest_ms INTEGER, last_ingest_ms INTEGER, result BLOB, flags TEXT NOT NULL DEFAULT '[]');
CREATE INDEX IF NOT EXISTS analyses_state ON analyses(state);
CREATE TABLE IF NOT EXISTS submissions (
  id TEXT NOT NULL, party INTEGER NOT NULL, ct BLOB, error TEXT, at_ms INTEGER NOT NULL,
  PRIMARY KEY (id, party));
CREATE TABLE IF NOT EXISTS jobs (
  job_id TEXT PRIMARY KEY, analyses TEXT NOT NULL, reached TEXT NOT NULL,
  dispatched_ms INTEGER NOT NULL, deadline_ms INTEGER NOT NULL, closed INTEGER NOT NULL DEFAULT 0);
CREATE TABLE IF NOT EXISTS stream_pending (
  stream_id TEXT NOT NULL, ts INTEGER NOT NULL, ingest_ms INTEGER NOT NULL,
  PRIMARY KEY (stream_id, ts));
CREATE TABLE IF NOT EXISTS audit (at_ms INTEGER NOT NULL, id TEXT, msg TEXT NOT NULL);
)";

struct Rec {
  std::string id, requester, mode, type, state, code, parent, job_id;
  std::vector<uint64_t> data_ids;
  std::vector<int> parties;
  uint64_t t_begin = 0, t_end = 0, batch_size = 0, batches = 0;
  uint64_t submitted_ms = 0, dispatched_ms = 0, stored_ms = 0, first_ingest_ms = 0, last_ingest_ms = 0;
  Bytes result;
  json flags = json::array();

  bool terminal() const { return state == "done" || state == "failed"; }
  bool is_stream_parent() const { return mode == "stream" && parent.empty(); }
  bool has_party(int p) const { return std::find(parties.begin(), parties.end(), p) != parties.end(); }
};

constexpr const char* kRecCols =
    "id, requester, mode, type, data_ids, t_begin, t_end, batch_size, parties, state, code, parent, job_id, "
    "batches, submitted_ms, dispatched_ms, stored_ms, first_ingest_ms, last_ingest_ms, result, flags";

Rec read_rec(const Stmt& s) {
  Rec r;
  r.id = s.text(0);
  r.requester = s.text(1);
  r.mode = s.text(2);
  r.type = s.text(3);
  r.data_ids = json::parse(s.text(4)).get<std::vector<uint64_t>>();
  r.t_begin = s.i64(5);
  r.t_end = s.i64(6);
  r.batch_size = s.i64(7);
  r.parties = json::parse(s.text(8)).get<std::vector<int>>();
  r.state = s.text(9);
  r.code = s.text(10);
  r.parent = s.text(11);
  r.job_id = s.text(12);
  r.batches = s.i64(13);
  r.submitted_ms = s.i64(14);
  r.dispatched_ms = s.i64(15);
  r.stored_ms = s.i64(16);
  r.first_ingest_ms = s.i64(17);
  r.last_ingest_ms = s.i64(18);
  r.result = s.blob(19);
  r.flags = json::parse(s.text(20));
  return r;
}

std::string random_id(const char* prefix) { return prefix + hex_encode(crypto::random_bytes(8)); }

party::AnalysisSpec to_spec(const Rec& r) {
  party::AnalysisSpec a;
  a.id = r.id;
  a.user = r.requester;
  a.type = r.type;
  a.mode = r.mode == "stream" ? party::Mode::kStream : party::Mode::kAdhoc;
  a.data_ids = r.data_ids;
  a.t_begin = r.t_begin;
  a.t_end = r.t_end;
  return a;
}

}  // namespace

ObeliskConfig ObeliskConfig::from_kv(const KvConfig& kv) {
  ObeliskConfig c;
  auto db = [&](const char* key) {
    std::string v = kv.get_or(key, ":memory:");
    return v == ":memory:" ? v : kv.path(key);
  };
  c.data_db = db("data_db");
  c.key_db = db("key_db");
  c.meta_db = db("meta_db");
  for (const auto& [user, token] : kv.with_prefix("user.")) c.user_tokens[token] = user;
  for (int i = 0; i < 3; ++i) {
    std::string p = "party." + std::to_string(i + 1) + ".";
    c.party_tokens[i] = kv.get(p + "token");
    c.party_urls[i] = kv.get(p + "url");
    c.party_api_tokens[i] = kv.get(p + "api_token");
    if (kv.has(p + "pk")) c.party_pems[i] = read_file(kv.path(p + "pk"));
  }
  c.max_stream_batch = kv.get_int_or("stream.max_batch", static_cast<long long>(c.max_stream_batch));
  c.default_stream_batch = kv.get_int_or("stream.default_batch", static_cast<long long>(c.default_stream_batch));
  c.flush_interval = std::chrono::milliseconds(kv.get_int_or("stream.flush_ms", c.flush_interval.count()));
  c.max_job_rows = kv.get_int_or("job.max_rows", static_cast<long long>(c.max_job_rows));
  c.job_timeout = std::chrono::milliseconds(kv.get_int_or("job.timeout_ms", c.job_timeout.count()));
  c.keyshare_ttl = std::chrono::milliseconds(kv.get_int_or("keyshare.ttl_ms", c.keyshare_ttl.count()));
  c.commit_delay = std::chrono::milliseconds(kv.get_int_or("commit.delay_ms", c.commit_delay.count()));
  return c;
}

HttpPartyDispatch::HttpPartyDispatch(std::array<std::string, 3> urls, std::array<std::string, 3> tokens)
    : urls_(std::move(urls)), tokens_(std::move(tokens)) {}

bool HttpPartyDispatch::dispatch(int party, const party::Job& job) {
  httplib::Client c(urls_[party - 1]);
  c.set_bearer_token_auth(tokens_[party - 1]);
  c.set_connection_timeout(3);
  c.set_read_timeout(10);
  auto res = c.Post("/analyse", party::to_json(job).dump(), "application/json");
  if (!res) return false;
  // 409 means the party already holds this job, e.g. after an orchestrator restart.
  return res->status == 202 || res->status == 409;
}

struct Orchestrator::Impl {
  ObeliskConfig cfg;
  std::shared_ptr<PartyDispatch> dispatch;
  mutable std::mutex mu;  // guards the three stores
  std::mutex step_mu;     // one step at a time
  Db data, keys, meta;
  Stats stats;

  Impl(ObeliskConfig c, std::shared_ptr<PartyDispatch> d)
      : cfg(std::move(c)), dispatch(std::move(d)), data(cfg.data_db), keys(cfg.key_db), meta(cfg.meta_db) {
    data.exec(kDataSchema);
    keys.exec(kKeySchema);
    meta.exec(kMetaSchema);
  }

  void audit(const std::string& id, const std::string& msg, uint64_t now) {
    Stmt(meta, "INSERT INTO audit(at_ms, id, msg) VALUES (?, ?, ?)").bind(1, now).bind(2, id).bind(3, msg).run();
    spdlog::info("audit {}: {}", id, msg);
  }

  std::optional<Rec> load(const std::string& id) const {
    Stmt s(const_cast<Db&>(meta), std::string("SELECT ") + kRecCols + " FROM analyses WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_rec(s);
  }

  std::vector<Rec> load_where(const std::string& where, const std::string& arg = "") const {
    Stmt s(const_cast<Db&>(meta), std::string("SELECT ") + kRecCols + " FROM analyses WHERE " + where +
                                      " ORDER BY rowid");
    if (!arg.empty()) s.bind(1, arg);
    std::vector<Rec> out;
    while (s.step()) out.push_back(read_rec(s));
    return out;
  }

  void insert(const Rec& r) {
    Stmt s(meta, "INSERT INTO analyses(id, requester, mode, type, data_ids, t_begin, t_end, batch_size, parties, "
                 "state, code, parent, submitted_ms, first_ingest_ms, last_ingest_ms) "
                 "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, '', ?, ?, ?, ?)");
    s.bind(1, r.id).bind(2, r.requester).bind(3, r.mode).bind(4, r.type).bind(5, json(r.data_ids).dump());
    s.bind(6, r.t_begin).bind(7, r.t_end).bind(8, r.batch_size).bind(9, json(r.parties).dump());
    s.bind(10, r.state).bind(11, r.parent).bind(12, r.submitted_ms).bind(13, r.first_ingest_ms);
    s.bind(14, r.last_ingest_ms).run();
  }

  void add_flag(const Rec& r, const std::string& flag) {
    json f = load(r.id)->flags;
    f.push_back(flag);
    Stmt(meta, "UPDATE analyses SET flags = ? WHERE id = ?").bind(1, f.dump()).bind(2, r.id).run();
  }

  void finalize(const Rec& r, bool ok, const std::string& code, const Bytes& result, uint64_t now) {
    Stmt s(meta, "UPDATE analyses SET state = ?, code = ?, result = ?, stored_ms = ? WHERE id = ?");
    s.bind(1, std::string(ok ? "done" : "failed")).bind(2, code);
    if (ok) {
      s.bind(3, ByteSpan(result));
    } else {
      s.bind_null(3);
    }
    s.bind(4, now).bind(5, r.id).run();
    // Ad hoc key shares go as soon as the analysis is over; stream
    // envelopes stay with the registration until its window closes.
    if (r.mode == "adhoc") Stmt(keys, "DELETE FROM keyshares WHERE id = ?").bind(1, r.id).run();
    audit(r.id, ok ? "done" : "failed: " + code, now);
  }

  // --- pipeline stages -----------------------------------------------------

  void commit_stage(uint64_t now) {
    std::vector<std::tuple<std::string, uint64_t, uint64_t>> fresh;
    {
      Stmt s(data, "SELECT user, ts, ingest_ms FROM samples WHERE visible = 0 AND ingest_ms <= ?");
      s.bind(1, now - std::min<uint64_t>(now, cfg.commit_delay.count()));
      while (s.step()) fresh.emplace_back(s.text(0), s.i64(1), s.i64(2));
    }
    if (fresh.empty()) return;
    Txn t(data);
    for (const auto& [user, ts, ingest] : fresh) {
      Stmt(data, "UPDATE samples SET visible = 1 WHERE user = ? AND ts = ?").bind(1, user).bind(2, ts).run();
    }
    t.commit();
    for (const auto& [user, ts, ingest] : fresh) {
      for (const auto& st : load_where("state = 'active' AND requester = ?", user)) {
        if (ts < st.t_begin || ts > st.t_end || ingest < st.submitted_ms) continue;
        Stmt(meta, "INSERT OR IGNORE INTO stream_pending(stream_id, ts, ingest_ms) VALUES (?, ?, ?)")
            .bind(1, st.id)
            .bind(2, ts)
            .bind(3, ingest)
            .run();
      }
    }
  }

  void batch_stage(uint64_t now) {
    for (const auto& st : load_where("state = 'active'")) {
      std::vector<std::pair<uint64_t, uint64_t>> pending;  // ts, ingest_ms
      {
        Stmt s(meta, "SELECT ts, ingest_ms FROM stream_pending WHERE stream_id = ? ORDER BY ingest_ms, ts");
        s.bind(1, st.id);
        while (s.step()) pending.emplace_back(s.i64(0), s.i64(1));
      }
      size_t batches = st.batches;
      size_t at = 0;
      while (at < pending.size()) {
        size_t n = std::min<size_t>(st.batch_size, pending.size() - at);
        bool full = n == st.batch_size;
        bool stale = pending[at].second + cfg.flush_interval.count() <= now;
        if (!full && !stale) break;
        Rec c;
        c.id = st.id + "-b" + std::to_string(batches++);
        c.requester = st.requester;
        c.mode = "stream";
        c.type = st.type;
        c.t_begin = st.t_begin;
        c.t_end = st.t_end;
        c.batch_size = st.batch_size;
        c.parties = st.parties;
        c.state = "queued";
        c.parent = st.id;
        c.submitted_ms = now;
        c.first_ingest_ms = ~0ull;
        for (size_t k = at; k < at + n; ++k) {
          c.data_ids.push_back(pending[k].first);
          c.first_ingest_ms = std::min(c.first_ingest_ms, pending[k].second);
          c.last_ingest_ms = std::max(c.last_ingest_ms, pending[k].second);
        }
        std::sort(c.data_ids.begin(), c.data_ids.end());
        Txn t(meta);
        insert(c);
        for (auto ts : c.data_ids) {
          Stmt(meta, "DELETE FROM stream_pending WHERE stream_id = ? AND ts = ?").bind(1, st.id).bind(2, ts).run();
        }
        Stmt(meta, "UPDATE analyses SET batches = ? WHERE id = ?").bind(1, batches).bind(2, st.id).run();
        t.commit();
        at += n;
      }
      if (now > st.t_end && at == pending.size()) {
        Stmt(meta, "UPDATE analyses SET state = 'closed', stored_ms = ? WHERE id = ?").bind(1, now).bind(2, st.id).run();
        audit(st.id, "stream window closed", now);
      }
    }
  }

  void janitor_stage(uint64_t now) {
    Stmt s(keys, "DELETE FROM keyshares WHERE expires_ms <= ?");
    s.bind(1, now).run();
    if (keys.changes() > 0) audit("", std::to_string(keys.changes()) + " key shares expired", now);
    // Closed streams drop their envelopes once no batch still needs them.
    for (const auto& st : load_where("state = 'closed'")) {
      if (!load_where("parent = ? AND state IN ('queued', 'running')", st.id).empty()) continue;
      Stmt(keys, "DELETE FROM keyshares WHERE id = ?").bind(1, st.id).run();
    }
  }

  // Returns true when no job is in flight afterwards.
  bool close_jobs(uint64_t now) {
    Stmt s(meta, "SELECT job_id, analyses, reached, deadline_ms FROM jobs WHERE closed = 0");
    std::vector<std::tuple<std::string, std::vector<std::string>, std::vector<int>, uint64_t>> open;
    while (s.step()) {
      open.emplace_back(s.text(0), json::parse(s.text(1)).get<std::vector<std::string>>(),
                        json::parse(s.text(2)).get<std::vector<int>>(), s.i64(3));
    }
    bool idle = true;
    for (const auto& [job_id, ids, reached, deadline] : open) {
      bool complete = true;
      for (const auto& id : ids) {
        auto r = load(id);
        if (!r) continue;
        if (!r->terminal()) complete = false;
        for (int p : reached) {
          Stmt q(meta, "SELECT 1 FROM submissions WHERE id = ? AND party = ?");
          q.bind(1, id).bind(2, p);
          if (!q.step()) complete = false;
        }
      }
      if (!complete && now >= deadline) {
        for (const auto& id : ids) {
          auto r = load(id);
          if (r && !r->terminal()) finalize(*r, false, "timeout", {}, now);
        }
        complete = true;
      }
      if (complete) {
        Stmt(meta, "UPDATE jobs SET closed = 1 WHERE job_id = ?").bind(1, job_id).run();
      } else {
        idle = false;
      }
    }
    return idle;
  }

  // Picks the next job under the lock; the caller dispatches it.
  std::optional<party::Job> compose_job(uint64_t now) {
    auto queued = load_where("state = 'queued'");
    if (queued.empty()) return std::nullopt;
    party::Job job;
    job.job_id = random_id("job-");
    size_t rows = 0;
    std::vector<std::string> ids;
    Txn t(meta);
    for (const auto& r : queued) {
      if (!job.analyses.empty() && rows + r.data_ids.size() > cfg.max_job_rows) break;
      rows += r.data_ids.size();
      job.analyses.push_back(to_spec(r));
      ids.push_back(r.id);
      Stmt(meta, "UPDATE analyses SET state = 'running', job_id = ?, dispatched_ms = ? WHERE id = ?")
          .bind(1, job.job_id)
          .bind(2, now)
          .bind(3, r.id)
          .run();
    }
    Stmt(meta, "INSERT INTO jobs(job_id, analyses, reached, dispatched_ms, deadline_ms) VALUES (?, ?, '[]', ?, ?)")
        .bind(1, job.job_id)
        .bind(2, json(ids).dump())
        .bind(3, now)
        .bind(4, now + cfg.job_timeout.count())
        .run();
    t.commit();
    return job;
  }

  json evaluate(const Rec& r, uint64_t now) {
    struct Sub {
      int party;
      Bytes ct;
      std::string error;
    };
    std::vector<Sub> subs;
    Stmt s(meta, "SELECT party, ct, error FROM submissions WHERE id = ? ORDER BY at_ms, party");
    s.bind(1, r.id);
    while (s.step()) subs.push_back({static_cast<int>(s.i64(0)), s.blob(1), s.text(2)});
    std::map<Bytes, std::vector<int>> groups;
    for (const auto& x : subs) {
      if (x.error.empty()) groups[x.ct].push_back(x.party);
    }
    for (const auto& [ct, members] : groups) {
      if (members.size() < 2) continue;
      for (const auto& x : subs) {
        if (x.error.empty() && x.ct != ct) add_flag(r, "misbehavior:party-" + std::to_string(x.party));
      }
      finalize(r, true, "", ct, now);
      return {{"status", "accepted"}, {"state", "done"}};
    }
    size_t best = 0;
    for (const auto& [ct, members] : groups) best = std::max(best, members.size());
    size_t remaining = r.parties.size() - subs.size();
    if (best + remaining < 2) {
      std::string code = "no-agreement";
      for (const auto& x : subs) {
        if (!x.error.empty()) {
          code = x.error;
          break;
        }
      }
      finalize(r, false, code, {}, now);
      return {{"status", "accepted"}, {"state", "failed"}};
    }
    return {{"status", "accepted"}, {"state", "running"}};
  }
};

Orchestrator::Orchestrator(ObeliskConfig cfg, std::shared_ptr<PartyDispatch> dispatch)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(dispatch))) {}

Orchestrator::~Orchestrator() { stop(); }

Principal Orchestrator::authenticate(const std::string& bearer) const {
  if (bearer.empty()) return {};
  auto it = impl_->cfg.user_tokens.find(bearer);
  if (it != impl_->cfg.user_tokens.end()) return Principal::of_user(it->second);
  for (int i = 0; i < 3; ++i) {
    if (!impl_->cfg.party_tokens[i].empty() && impl_->cfg.party_tokens[i] == bearer) return Principal::of_party(i + 1);
  }
  return {};
}

void Orchestrator::start() {
  {
    std::lock_guard lk(loop_mu_);
    stopping_ = false;
  }
  loop_ = std::thread([this] {
    std::unique_lock lk(loop_mu_);
    while (!stopping_) {
      lk.unlock();
      try {
        step(party::now_ms());
      } catch (const std::exception& e) {
        spdlog::error("orchestrator step failed: {}", e.what());
      }
      lk.lock();
      loop_cv_.wait_for(lk, impl_->cfg.tick, [this] { return stopping_; });
    }
  });
}

void Orchestrator::stop() {
  {
    std::lock_guard lk(loop_mu_);
    stopping_ = true;
  }
  loop_cv_.notify_all();
  if (loop_.joinable()) loop_.join();
}

void Orchestrator::step(uint64_t now) {
  auto& m = *impl_;
  std::lock_guard step_lk(m.step_mu);
  std::optional<party::Job> job;
  {
    std::lock_guard lk(m.mu);
    m.commit_stage(now);
    m.batch_stage(now);
    m.janitor_stage(now);
    if (m.close_jobs(now)) job = m.compose_job(now);
  }
  if (!job) return;

  std::vector<int> reached;
  for (int p = 1; p <= 3; ++p) {
    if (m.dispatch->dispatch(p, *job)) reached.push_back(p);
  }
  std::lock_guard lk(m.mu);
  ++m.stats.jobs_dispatched;
  {
    Stmt s(m.meta, "SELECT COUNT(*) FROM jobs WHERE closed = 0");
    s.step();
    m.stats.max_in_flight = std::max<size_t>(m.stats.max_in_flight, s.i64(0));
  }
  Stmt(m.meta, "UPDATE jobs SET reached = ? WHERE job_id = ?").bind(1, json(reached).dump()).bind(2, job->job_id).run();
  spdlog::info("dispatched {} ({} analyses) to {} parties", job->job_id, job->analyses.size(), reached.size());
  if (reached.size() < 3) {
    for (const auto& a : job->analyses) {
      auto r = m.load(a.id);
      if (r && !r->terminal()) m.finalize(*r, false, "dispatch-failed", {}, now);
    }
  }
}

void Orchestrator::ingest(const Principal& who, uint64_t ts, const Bytes& record, uint64_t now) {
  if (who.kind != Principal::Kind::kUser) throw ApiError(403, "ingest requires a user token");
  if (record.size() != aesgcm::kSampleRecordBytes) {
    throw ApiError(400, "record must be " + std::to_string(aesgcm::kSampleRecordBytes) + " bytes, got " +
                            std::to_string(record.size()));
  }
  std::lock_guard lk(impl_->mu);
  Stmt s(impl_->data, "INSERT OR IGNORE INTO samples(user, ts, record, ingest_ms) VALUES (?, ?, ?, ?)");
  s.bind(1, who.user).bind(2, ts).bind(3, ByteSpan(record)).bind(4, now).run();
  if (impl_->data.changes() == 0) throw ApiError(409, "duplicate timestamp " + std::to_string(ts));
}

std::string Orchestrator::request_analysis(const Principal& who, const json& req, uint64_t now) {
  if (who.kind != Principal::Kind::kUser) throw ApiError(403, "analysis requests require a user token");
  Rec r;
  std::vector<Bytes> env;
  try {
    r.mode = req.value("mode", std::string("adhoc"));
    r.type = req.at("type").get<std::string>();
    for (const auto& e : req.at("envelopes")) env.push_back(base64_decode(e.get<std::string>()));
    r.parties = req.value("parties", std::vector<int>{1, 2, 3});
    if (r.mode == "adhoc") {
      r.data_ids = req.at("data_ids").get<std::vector<uint64_t>>();
    } else if (r.mode == "stream") {
      r.t_begin = req.at("t_begin").get<uint64_t>();
      r.t_end = req.at("t_end").get<uint64_t>();
      r.batch_size = req.value("batch_size", static_cast<uint64_t>(impl_->cfg.default_stream_batch));
    } else {
      throw ApiError(400, "mode must be adhoc or stream");
    }
  } catch (const json::exception& e) {
    throw ApiError(400, std::string("malformed request: ") + e.what());
  } catch (const FormatError& e) {
    throw ApiError(400, e.what());
  }
  if (r.type.empty()) throw ApiError(400, "empty analysis type");
  if (r.parties != std::vector<int>{1, 2, 3}) throw ApiError(400, "only the configured party set {1,2,3} is served");
  if (env.size() != 3) throw ApiError(400, "three envelopes required");
  for (const auto& e : env) {
    if (e.size() != party::kEnvelopeBytes) throw ApiError(400, "envelopes must be 256 bytes");
  }
  if (r.mode == "stream") {
    if (r.t_end < r.t_begin) throw ApiError(400, "t_end before t_begin");
    if (r.batch_size == 0) throw ApiError(400, "batch_size must be positive");
    r.batch_size = std::min<uint64_t>(r.batch_size, impl_->cfg.max_stream_batch);
  } else {
    if (r.data_ids.empty()) throw ApiError(400, "no data IDs");
    auto sorted = r.data_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ApiError(400, "duplicate data IDs");
  }

  std::lock_guard lk(impl_->mu);
  for (auto ts : r.data_ids) {
    Stmt s(impl_->data, "SELECT user, visible FROM samples WHERE ts = ? ORDER BY user = ? DESC");
    s.bind(1, ts).bind(2, who.user);
    if (!s.step()) throw ApiError(404, "unknown data ID " + std::to_string(ts));
    if (s.text(0) != who.user) throw ApiError(403, "data ID " + std::to_string(ts) + " belongs to another user");
    if (s.i64(1) == 0) throw ApiError(404, "data ID " + std::to_string(ts) + " not yet committed");
  }
  r.id = random_id(r.mode == "stream" ? "s-" : "a-");
  r.requester = who.user;
  r.state = r.mode == "stream" ? "active" : "queued";
  r.submitted_ms = now;
  uint64_t expires = (r.mode == "stream" ? std::max(now, r.t_end) : now) + impl_->cfg.keyshare_ttl.count();
  Txn tk(impl_->keys);
  for (int p = 0; p < 3; ++p) {
    Stmt(impl_->keys, "INSERT INTO keyshares(id, party, envelope, expires_ms) VALUES (?, ?, ?, ?)")
        .bind(1, r.id)
        .bind(2, p + 1)
        .bind(3, ByteSpan(env[p]))
        .bind(4, expires)
        .run();
  }
  tk.commit();
  impl_->insert(r);
  impl_->audit(r.id, "requested by " + r.requester + " (" + r.mode + ")", now);
  return r.id;
}

json Orchestrator::get_analysis(const Principal& who, const std::string& id) const {
  std::lock_guard lk(impl_->mu);
  auto r = impl_->load(id);
  if (!r) throw ApiError(404, "unknown analysis");
  bool owner = who.kind == Principal::Kind::kUser && who.user == r->requester;
  bool party = who.kind == Principal::Kind::kParty && r->has_party(who.party);
  if (!owner && !party) throw ApiError(403, "not the owner or an assigned party");
  json j{{"id", r->id},
         {"requester", r->requester},
         {"mode", r->mode},
         {"type", r->type},
         {"data_ids", r->data_ids},
         {"parties", r->parties},
         {"state", r->state},
         {"code", r->code},
         {"submitted_ms", r->submitted_ms},
         {"dispatched_ms", r->dispatched_ms},
         {"stored_ms", r->stored_ms},
         {"flags", r->flags}};
  if (r->mode == "stream") {
    j["t_begin"] = r->t_begin;
    j["t_end"] = r->t_end;
    j["batch_size"] = r->batch_size;
  }
  if (!r->parent.empty()) {
    j["parent"] = r->parent;
    j["first_ingest_ms"] = r->first_ingest_ms;
    j["last_ingest_ms"] = r->last_ingest_ms;
  }
  if (r->is_stream_parent()) {
    json kids = json::array();
    for (const auto& c : impl_->load_where("parent = ?", r->id)) kids.push_back(c.id);
    j["children"] = kids;
  }
  json subs = json::array();
  Stmt s(const_cast<Db&>(impl_->meta), "SELECT party, error, at_ms FROM submissions WHERE id = ? ORDER BY party");
  s.bind(1, id);
  while (s.step()) {
    subs.push_back({{"party", s.i64(0)}, {"error", s.text(1)}, {"at_ms", s.i64(2)}});
  }
  j["submissions"] = subs;
  return j;
}

json Orchestrator::get_result(const Principal& who, const std::string& id) const {
  std::lock_guard lk(impl_->mu);
  auto r = impl_->load(id);
  if (!r) throw ApiError(404, "unknown analysis");
  if (who.kind != Principal::Kind::kUser || who.user != r->requester) throw ApiError(403, "not the owner");
  json j{{"id", r->id},     {"user", r->requester},        {"type", r->type},
         {"state", r->state}, {"code", r->code},           {"rows", r->data_ids.size()},
         {"submitted_ms", r->submitted_ms}, {"stored_ms", r->stored_ms}, {"flags", r->flags}};
  if (r->state == "done") j["ct"] = base64_encode(r->result);
  return j;
}

std::vector<std::optional<Bytes>> Orchestrator::get_data(const Principal& who, const std::string& user,
                                                         const std::vector<uint64_t>& ids) const {
  if (who.kind != Principal::Kind::kParty) throw ApiError(403, "data access is party-only");
  std::lock_guard lk(impl_->mu);
  // Only records of an analysis currently running for this party.
  std::set<uint64_t> allowed;
  for (const auto& r : impl_->load_where("state = 'running' AND requester = ?", user)) {
    if (r.has_party(who.party)) allowed.insert(r.data_ids.begin(), r.data_ids.end());
  }
  for (auto id : ids) {
    if (!allowed.count(id)) throw ApiError(403, "data ID " + std::to_string(id) + " is not part of a running analysis");
  }
  std::vector<std::optional<Bytes>> out;
  for (auto id : ids) {
    Stmt s(const_cast<Db&>(impl_->data), "SELECT record FROM samples WHERE user = ? AND ts = ? AND visible = 1");
    s.bind(1, user).bind(2, id);
    if (s.step()) {
      out.emplace_back(s.blob(0));
    } else {
      out.emplace_back();
    }
  }
  return out;
}

std::vector<uint64_t> Orchestrator::list_samples(const Principal& who) const {
  if (who.kind != Principal::Kind::kUser) throw ApiError(403, "listing requires a user token");
  std::lock_guard lk(impl_->mu);
  Stmt s(const_cast<Db&>(impl_->data), "SELECT ts FROM samples WHERE user = ? AND visible = 1 ORDER BY ts");
  s.bind(1, who.user);
  std::vector<uint64_t> out;
  while (s.step()) out.push_back(s.i64(0));
  return out;
}

Bytes Orchestrator::get_keyshare(const Principal& who, const std::string& id, int party) const {
  if (who.kind != Principal::Kind::kParty || who.party != party) throw ApiError(403, "envelope belongs to another party");
  std::lock_guard lk(impl_->mu);
  auto r = impl_->load(id);
  if (!r) throw ApiError(404, "unknown analysis");
  if (!r->has_party(party)) throw ApiError(403, "party not assigned");
  if (r->terminal() || r->state == "closed") throw ApiError(410, "analysis finished; key share deleted");
  std::string key_id = r->parent.empty() ? r->id : r->parent;
  Stmt s(const_cast<Db&>(impl_->keys), "SELECT envelope FROM keyshares WHERE id = ? AND party = ?");
  s.bind(1, key_id).bind(2, party);
  if (!s.step()) throw ApiError(410, "key share expired");
  return s.blob(0);
}

json Orchestrator::accept_result(const Principal& who, const std::string& id, const json& body, uint64_t now) {
  if (who.kind != Principal::Kind::kParty) throw ApiError(403, "results are party-only");
  int party;
  Bytes ct;
  std::string error;
  try {
    party = body.at("party").get<int>();
    if (body.contains("error")) {
      error = body.at("error").get<std::string>();
    } else {
      ct = base64_decode(body.at("ct").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ApiError(400, std::string("malformed result: ") + e.what());
  } catch (const FormatError& e) {
    throw ApiError(400, e.what());
  }
  if (party != who.party) throw ApiError(403, "party mismatch");
  if (body.contains("error") && error.empty()) error = "unspecified";
  if (error.size() > 64) error.resize(64);

  std::lock_guard lk(impl_->mu);
  auto r = impl_->load(id);
  if (!r) throw ApiError(404, "unknown analysis");
  if (!r->has_party(party)) throw ApiError(403, "party not assigned");
  if (r->state == "queued" || r->is_stream_parent()) throw ApiError(409, "analysis is not running");
  if (error.empty() && ct.size() != aesgcm::result_bytes(r->data_ids.size())) {
    throw ApiError(400, "result must be " + std::to_string(aesgcm::result_bytes(r->data_ids.size())) + " bytes");
  }
  Stmt ins(impl_->meta, "INSERT OR IGNORE INTO submissions(id, party, ct, error, at_ms) VALUES (?, ?, ?, ?, ?)");
  ins.bind(1, id).bind(2, party);
  if (error.empty()) {
    ins.bind(3, ByteSpan(ct)).bind_null(4);
  } else {
    ins.bind_null(3).bind(4, error);
  }
  ins.bind(5, now).run();
  if (impl_->meta.changes() == 0) {
    impl_->audit(id, "duplicate submission from party " + std::to_string(party) + " ignored", now);
    return {{"status", "ignored"}, {"state", r->state}};
  }
  if (r->terminal()) {
    if (r->state == "done" && error.empty() && ct != r->result) {
      impl_->add_flag(*r, "misbehavior:party-" + std::to_string(party));
    }
    impl_->audit(id, "late submission from party " + std::to_string(party) + " after " + r->state, now);
    return {{"status", "ignored"}, {"state", r->state}};
  }
  return impl_->evaluate(*r, now);
}

json Orchestrator::parties() const {
  json arr = json::array();
  for (int i = 0; i < 3; ++i) arr.push_back({{"party", i + 1}, {"pk", impl_->cfg.party_pems[i]}});
  return arr;
}

Orchestrator::Stats Orchestrator::stats() const {
  std::lock_guard lk(impl_->mu);
  return impl_->stats;
}

}  // namespace mpcpipe::obelisk
