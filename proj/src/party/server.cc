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

#include "mpcpipe/party/server.h"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "mpcpipe/common/error.h"
#include "mpcpipe/party/context.h"

namespace mpcpipe::party {
namespace {

using nlohmann::json;

std::unique_ptr<httplib::Client> client(const std::string& base, const std::string& token) {
  auto c = std::make_unique<httplib::Client>(base);
  c->set_bearer_token_auth(token);
  c->set_connection_timeout(5);
  c->set_read_timeout(60);
  c->set_write_timeout(60);
  return c;
}

bool authorized(const httplib::Request& req, const std::string& token) {
  return req.get_header_value("Authorization") == "Bearer " + token;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

HttpJobSource::HttpJobSource(std::string base_url, std::string token)
    : base_url_(std::move(base_url)), token_(std::move(token)) {}

std::vector<std::optional<Bytes>> HttpJobSource::get_data(const std::string& user, const std::vector<uint64_t>& ids) {
  std::string list;
  for (size_t i = 0; i < ids.size(); ++i) list += (i ? "," : "") + std::to_string(ids[i]);
  httplib::Params params{{"user", user}, {"ids", list}};
  auto res = client(base_url_, token_)->Get("/data", params, httplib::Headers{});
  if (!res) throw NetworkError("orchestrator unreachable: GET /data");
  if (res->status != 200) {
    spdlog::warn("GET /data answered {}: {}", res->status, res->body);
    return {};
  }
  std::vector<std::optional<Bytes>> out;
  try {
    auto body = json::parse(res->body);
    for (const auto& r : body.at("records")) {
      if (r.is_null()) {
        out.emplace_back();
      } else {
        out.emplace_back(base64_decode(r.get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("GET /data: ") + e.what());
  }
  return out;
}

std::optional<Bytes> HttpJobSource::get_keyshare(const std::string& analysis_id, int party) {
  auto res = client(base_url_, token_)->Get("/keyshare/" + analysis_id + "/" + std::to_string(party + 1));
  if (!res) throw NetworkError("orchestrator unreachable: GET /keyshare");
  if (res->status != 200) return std::nullopt;
  try {
    return base64_decode(json::parse(res->body).at("envelope").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("GET /keyshare: ") + e.what());
  }
}

void HttpJobSource::post_result(const std::string& analysis_id, const std::string& body) {
  auto res = client(base_url_, token_)->Post("/result/" + analysis_id, body, "application/json");
  if (!res) throw NetworkError("orchestrator unreachable: POST /result");
  if (res->status != 200) {
    throw NetworkError("POST /result rejected with " + std::to_string(res->status) + ": " + res->body);
  }
}

void HttpJobSource::submit_result(const std::string& analysis_id, int party, const Bytes& ct) {
  post_result(analysis_id, json{{"party", party + 1}, {"ct", base64_encode(ct)}}.dump());
}

void HttpJobSource::report_failure(const std::string& analysis_id, int party, const std::string& code) {
  post_result(analysis_id, json{{"party", party + 1}, {"error", code}}.dump());
}

PartyServer::PartyServer(PartyConfig cfg)
    : cfg_(std::move(cfg)), mesh_(cfg_.index, cfg_.peers, PeerMesh::cluster_tag(cfg_.pk_moduli)) {
  ctx_.index = cfg_.index;
  ctx_.sk = cfg_.sk;
  ctx_.pk_moduli = cfg_.pk_moduli;
  source_ = std::make_shared<HttpJobSource>(cfg_.orchestrator_url, cfg_.orchestrator_token);
}

PartyServer::~PartyServer() { stop(); }

void PartyServer::start() {
  for (const auto& [type, path] : cfg_.model_paths) {
    auto bytes = to_bytes(read_file(path));
    ctx_.models[type] = std::make_shared<infer::SharedModel>(infer::read_model_share(bytes, cfg_.index));
    spdlog::info("party {}: loaded model share for type '{}'", cfg_.index + 1, type);
  }
  mesh_.start();

  http_ = std::make_unique<httplib::Server>();
  http_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lk(mu_);
    reply(res, 200, {{"party", cfg_.index + 1}, {"mode", rss::to_string(cfg_.mode)}, {"queued", queue_.size()},
                     {"jobs", history_.size()}});
  });
  http_->Get("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, cfg_.api_token)) return reply(res, 401, {{"error", "unauthorized"}});
    json arr = json::array();
    for (const auto& r : history()) {
      arr.push_back({{"job_id", r.job_id}, {"state", r.state}, {"queued_ms", r.queued_ms},
                     {"started_ms", r.started_ms}, {"finished_ms", r.finished_ms}, {"ok", r.ok},
                     {"failed", r.failed}});
    }
    reply(res, 200, arr);
  });
  http_->Post("/analyse", [this](const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, cfg_.api_token)) return reply(res, 401, {{"error", "unauthorized"}});
    Job job;
    try {
      job = job_from_json(json::parse(req.body));
    } catch (const json::exception& e) {
      return reply(res, 400, {{"error", std::string("malformed job: ") + e.what()}});
    } catch (const FormatError& e) {
      return reply(res, 400, {{"error", e.what()}});
    }
    std::string id = job.job_id;
    if (!enqueue(std::move(job))) return reply(res, 409, {{"error", "duplicate job id"}, {"job_id", id}});
    reply(res, 202, {{"job_id", id}});
  });

  const auto& ep = cfg_.http;
  if (ep.port == 0) {
    http_port_ = http_->bind_to_any_port(ep.host);
  } else {
    http_port_ = http_->bind_to_port(ep.host, ep.port) ? ep.port : -1;
  }
  if (http_port_ < 0) throw NetworkError("cannot bind job API on " + ep.str());
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  worker_ = std::thread([this] { worker_loop(); });
  spdlog::info("party {}: job API on {}:{}, mode {}", cfg_.index + 1, ep.host, http_port_, rss::to_string(cfg_.mode));
}

void PartyServer::stop() {
  {
    std::lock_guard lk(mu_);
    if (stopped_) return;
    stopping_ = true;
    stopped_ = true;
  }
  cv_.notify_all();
  if (http_) http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (worker_.joinable()) worker_.join();
  mesh_.stop();
}

void PartyServer::wait() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [this] { return stopping_; });
}

bool PartyServer::enqueue(Job job) {
  {
    std::lock_guard lk(mu_);
    if (!seen_.insert(job.job_id).second) return false;
    history_.push_back({job.job_id, "queued", now_ms()});
    queue_.push_back(std::move(job));
  }
  cv_.notify_all();
  return true;
}

std::vector<JobRecord> PartyServer::history() const {
  std::lock_guard lk(mu_);
  return history_;
}

void PartyServer::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    run_one(job);
  }
}

void PartyServer::run_one(const Job& job) {
  auto mark = [&](auto&& f) {
    std::lock_guard lk(mu_);
    for (auto& r : history_) {
      if (r.job_id == job.job_id) f(r);
    }
  };
  mark([](JobRecord& r) {
    r.state = "running";
    r.started_ms = now_ms();
  });
  size_t ok = 0, failed = 0;
  try {
    auto [to_next, to_prev] = mesh_.links(cfg_.session_timeout);
    rss::Session s(cfg_.index, rss::make_session_id("job:" + job.job_id), cfg_.mode, cfg_.seeds, to_next, to_prev,
                   cfg_.session_timeout);
    auto rep = run_job(s, job, ctx_, *source_, now_ms());
    to_next->drop_session(s.id());
    to_prev->drop_session(s.id());
    for (const auto& a : rep.analyses) (a.ok ? ok : failed)++;
  } catch (const std::exception& e) {
    spdlog::error("party {}: job {} could not start: {}", cfg_.index + 1, job.job_id, e.what());
    for (const auto& a : job.analyses) {
      try {
        source_->report_failure(a.id, cfg_.index, failure::kNetwork);
      } catch (const std::exception&) {
      }
      ++failed;
    }
  }
  mark([&](JobRecord& r) {
    r.state = "done";
    r.finished_ms = now_ms();
    r.ok = ok;
    r.failed = failed;
  });
}

}  // namespace mpcpipe::party
