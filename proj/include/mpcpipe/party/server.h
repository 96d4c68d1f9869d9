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

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mpcpipe/party/config.h"
#include "mpcpipe/party/peers.h"
#include "mpcpipe/party/runner.h"

namespace httplib {
class Server;
}

namespace mpcpipe::party {

// JobSource over the orchestrator's HTTP API, authenticated with the
// party's bearer token. Transport errors throw NetworkError.
class HttpJobSource : public JobSource {
 public:
  HttpJobSource(std::string base_url, std::string token);

  std::vector<std::optional<Bytes>> get_data(const std::string& user, const std::vector<uint64_t>& ids) override;
  std::optional<Bytes> get_keyshare(const std::string& analysis_id, int party) override;
  void submit_result(const std::string& analysis_id, int party, const Bytes& ct) override;
  void report_failure(const std::string& analysis_id, int party, const std::string& code) override;

 private:
  void post_result(const std::string& analysis_id, const std::string& body);

  std::string base_url_;
  std::string token_;
};

struct JobRecord {
  std::string job_id;
  std::string state;  // queued | running | done
  uint64_t queued_ms = 0;
  uint64_t started_ms = 0;
  uint64_t finished_ms = 0;
  size_t ok = 0;
  size_t failed = 0;
};

// Party daemon: concurrent HTTP intake, one worker running jobs strictly in
// arrival order, persistent peer links.
class PartyServer {
 public:
  explicit PartyServer(PartyConfig cfg);
  ~PartyServer();
  PartyServer(const PartyServer&) = delete;
  PartyServer& operator=(const PartyServer&) = delete;

  // Loads model shares, opens the peer listener and binds the HTTP port.
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  int http_port() const { return http_port_; }
  int mpc_port() const { return mesh_.listen_port(); }

  // Test hook: replaces the orchestrator client.
  void set_job_source(std::shared_ptr<JobSource> src) { source_ = std::move(src); }

  // Returns false for a duplicate job id.
  bool enqueue(Job job);
  std::vector<JobRecord> history() const;

 private:
  void worker_loop();
  void run_one(const Job& job);

  PartyConfig cfg_;
  PartyContext ctx_;
  PeerMesh mesh_;
  std::shared_ptr<JobSource> source_;
  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  std::thread worker_;
  int http_port_ = -1;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Job> queue_;
  std::set<std::string> seen_;
  std::vector<JobRecord> history_;
  bool stopping_ = false;
  bool stopped_ = false;
};

}  // namespace mpcpipe::party
