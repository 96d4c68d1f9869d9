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
#include <map>
#include <memory>
#include <string>

#include "mpcpipe/obelisk/orchestrator.h"
#include "mpcpipe/obelisk/server.h"
#include "mpcpipe/party/server.h"

namespace mpcpipe::cluster {

struct ClusterOptions {
  std::string dir;
  rss::SecurityMode mode = rss::SecurityMode::kSemiHonest;
  std::string type = "ecg";
  std::string model_json;  // plaintext model; empty draws a random He-uniform model
  uint64_t model_seed = 1;
  std::vector<std::string> users{"alice", "bob"};
  bool memory_stores = false;
  long long flush_ms = 2000;
  long long max_stream_batch = 64;
  long long job_timeout_ms = 600000;
};

// What init_cluster wrote: every file lives under `dir`.
struct ClusterLayout {
  std::string dir;
  std::string orchestrator_url;
  std::string obelisk_conf;
  std::array<std::string, 3> party_conf;
  std::map<std::string, std::string> user_tokens;  // user -> token

  static ClusterLayout load(const std::string& dir);  // reads cluster.json
};

// Generates RSA keys, PRF seeds, bearer tokens, free loopback ports, the
// model shares and one config file per process, plus cluster.json.
ClusterLayout init_cluster(const ClusterOptions& opt);

// The four services of a layout inside this process, on loopback TCP.
class LocalCluster {
 public:
  explicit LocalCluster(ClusterLayout layout);
  ~LocalCluster();

  void start();
  void stop();
  const ClusterLayout& layout() const { return layout_; }
  obelisk::Orchestrator& orchestrator() { return *core_; }
  party::PartyServer& party(int i) { return *parties_[i]; }

 private:
  ClusterLayout layout_;
  std::shared_ptr<obelisk::Orchestrator> core_;
  std::unique_ptr<obelisk::ObeliskServer> api_;
  std::array<std::unique_ptr<party::PartyServer>, 3> parties_;
};

}  // namespace mpcpipe::cluster
