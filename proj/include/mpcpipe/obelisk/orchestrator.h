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

#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mpcpipe/common/bytes.h"
#include "mpcpipe/common/kvconfig.h"
#include "mpcpipe/party/job.h"

namespace mpcpipe::obelisk {

// Handler failure carrying the HTTP status to answer with.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, const std::string& msg) : std::runtime_error(msg), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct Principal {
  enum class Kind { kNone, kUser, kParty } kind = Kind::kNone;
  std::string user;
  int party = 0;  // 1..3

  static Principal of_user(std::string u) { return {Kind::kUser, std::move(u), 0}; }
  static Principal of_party(int p) { return {Kind::kParty, "", p}; }
};

struct ObeliskConfig {
  std::string data_db = ":memory:";
  std::string key_db = ":memory:";
  std::string meta_db = ":memory:";
  std::map<std::string, std::string> user_tokens;  // token -> user
  std::array<std::string, 3> party_tokens;         // token each party presents to us
  std::array<std::string, 3> party_urls;
  std::array<std::string, 3> party_api_tokens;     // token we present to each party
  std::array<std::string, 3> party_pems;           // public keys, served to users
  size_t max_stream_batch = 64;                    // platform cap on B
  size_t default_stream_batch = 16;
  size_t max_job_rows = 256;
  std::chrono::milliseconds flush_interval{2000};
  std::chrono::milliseconds job_timeout{std::chrono::minutes(10)};
  std::chrono::milliseconds keyshare_ttl{std::chrono::hours(1)};
  std::chrono::milliseconds commit_delay{20};
  std::chrono::milliseconds tick{20};

  // Keys: data_db, key_db, meta_db; user.<name> = token; party.<n>.token,
  // party.<n>.url, party.<n>.api_token, party.<n>.pk (PEM path);
  // stream.max_batch, stream.default_batch, stream.flush_ms, job.max_rows,
  // job.timeout_ms, keyshare.ttl_ms, commit.delay_ms.
  static ObeliskConfig from_kv(const KvConfig& kv);
};

// Sends a job to one MPC party (1..3); false when the party is unreachable
// or refuses it.
class PartyDispatch {
 public:
  virtual ~PartyDispatch() = default;
  virtual bool dispatch(int party, const party::Job& job) = 0;
};

class HttpPartyDispatch : public PartyDispatch {
 public:
  HttpPartyDispatch(std::array<std::string, 3> urls, std::array<std::string, 3> tokens);
  bool dispatch(int party, const party::Job& job) override;

 private:
  std::array<std::string, 3> urls_, tokens_;
};

// Orchestrator core: stores, dispatcher, micro-batcher, agreement. All state
// lives in the three databases, so a new instance over the same files
// continues where the previous one stopped. Every public call is atomic.
class Orchestrator {
 public:
  Orchestrator(ObeliskConfig cfg, std::shared_ptr<PartyDispatch> dispatch);
  ~Orchestrator();
  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  Principal authenticate(const std::string& bearer) const;

  // Background loop running step() every tick.
  void start();
  void stop();
  // One pass of commit stage, micro-batcher, dispatcher and janitor.
  void step(uint64_t now_ms);

  void ingest(const Principal& who, uint64_t ts, const Bytes& record, uint64_t now_ms);
  // Request body: {"mode","type","data_ids"|("t_begin","t_end","batch_size"),
  // "parties"?, "envelopes":[b64 x3]}. Returns the analysis id.
  std::string request_analysis(const Principal& who, const nlohmann::json& req, uint64_t now_ms);
  nlohmann::json get_analysis(const Principal& who, const std::string& id) const;
  nlohmann::json get_result(const Principal& who, const std::string& id) const;
  std::vector<std::optional<Bytes>> get_data(const Principal& who, const std::string& user,
                                             const std::vector<uint64_t>& ids) const;
  std::vector<uint64_t> list_samples(const Principal& who) const;
  Bytes get_keyshare(const Principal& who, const std::string& id, int party) const;
  // Body: {"party":n,"ct":b64} or {"party":n,"error":code}.
  nlohmann::json accept_result(const Principal& who, const std::string& id, const nlohmann::json& body,
                               uint64_t now_ms);
  nlohmann::json parties() const;

  struct Stats {
    size_t jobs_dispatched = 0;
    size_t max_in_flight = 0;
  };
  Stats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread loop_;
  std::mutex loop_mu_;
  std::condition_variable loop_cv_;
  bool stopping_ = false;
};

}  // namespace mpcpipe::obelisk
