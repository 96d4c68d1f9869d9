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

#include "mpcpipe/cluster/cluster.h"

#include <filesystem>

#include "json.hpp"
#include "mpcpipe/common/error.h"
#include "mpcpipe/infer/model.h"
#include "mpcpipe/rss/channel.h"

namespace mpcpipe::cluster {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int free_port() {
  rss::TcpListener l(0);
  int p = l.port();
  l.close();
  return p;
}

std::string token() { return hex_encode(crypto::random_bytes(16)); }

}  // namespace

ClusterLayout ClusterLayout::load(const std::string& dir) {
  auto j = json::parse(read_file((fs::path(dir) / "cluster.json").string()));
  ClusterLayout l;
  l.dir = dir;
  l.orchestrator_url = j.at("url");
  l.obelisk_conf = (fs::path(dir) / "obeliskd.conf").string();
  for (int i = 0; i < 3; ++i) l.party_conf[i] = (fs::path(dir) / ("party" + std::to_string(i + 1) + ".conf")).string();
  l.user_tokens = j.at("users").get<std::map<std::string, std::string>>();
  return l;
}

ClusterLayout init_cluster(const ClusterOptions& opt) {
  fs::path dir = fs::absolute(opt.dir);
  fs::create_directories(dir);
  ClusterLayout l;
  l.dir = dir.string();

  infer::PlainModel model = opt.model_json.empty()
                                ? infer::random_model(infer::reference_architecture(), opt.model_seed)
                                : infer::PlainModel::from_json(read_file(opt.model_json));
  write_file((dir / "model.json").string(), model.to_json());
  auto shares = infer::share_model(model);

  // Seeds: party i shares seed_{i,i+1} with its successor.
  std::array<Bytes, 3> pair_seed;
  for (auto& s : pair_seed) s = crypto::random_bytes(16);

  int api_port = free_port();
  std::array<int, 3> mpc_port{}, http_port{};
  for (int i = 0; i < 3; ++i) {
    mpc_port[i] = free_port();
    http_port[i] = free_port();
  }
  l.orchestrator_url = "http://127.0.0.1:" + std::to_string(api_port);
  std::array<std::string, 3> party_tok, api_tok;
  for (int i = 0; i < 3; ++i) {
    party_tok[i] = token();
    api_tok[i] = token();
  }
  for (const auto& u : opt.users) l.user_tokens[u] = token();

  for (int i = 0; i < 3; ++i) {
    std::string n = std::to_string(i + 1);
    auto key = crypto::RsaKey::generate();
    write_file((dir / ("party" + n + ".key")).string(), key.private_pem());
    write_file((dir / ("party" + n + ".pub")).string(), key.public_pem());
    write_file((dir / (opt.type + ".p" + n + ".share")).string(), to_string(infer::write_model_share(shares[i], i)));
  }
  for (int i = 0; i < 3; ++i) {
    std::string n = std::to_string(i + 1);
    std::string c;
    c += "# MPC party " + n + "\n";
    c += "party = " + n + "\n";
    c += std::string("mode = ") + rss::to_string(opt.mode) + "\n";
    c += "sk = party" + n + ".key\n";
    for (int j = 0; j < 3; ++j) {
      std::string m = std::to_string(j + 1);
      c += "pk." + m + " = party" + m + ".pub\n";
      c += "peer." + m + " = 127.0.0.1:" + std::to_string(mpc_port[j]) + "\n";
    }
    c += "http = 127.0.0.1:" + std::to_string(http_port[i]) + "\n";
    c += "orchestrator = " + l.orchestrator_url + "\n";
    c += "orchestrator_token = " + party_tok[i] + "\n";
    c += "api_token = " + api_tok[i] + "\n";
    c += "seed.prev = " + hex_encode(pair_seed[(i + 2) % 3]) + "\n";
    c += "seed.next = " + hex_encode(pair_seed[i]) + "\n";
    c += "model." + opt.type + " = " + opt.type + ".p" + n + ".share\n";
    c += "log = party" + n + ".log\n";
    l.party_conf[i] = (dir / ("party" + n + ".conf")).string();
    write_file(l.party_conf[i], c);
  }

  std::string o = "# orchestrator\nlisten = 127.0.0.1:" + std::to_string(api_port) + "\n";
  std::string db = opt.memory_stores ? ":memory:" : "";
  o += "data_db = " + (db.empty() ? "data.sqlite" : db) + "\n";
  o += "key_db = " + (db.empty() ? "keys.sqlite" : db) + "\n";
  o += "meta_db = " + (db.empty() ? "meta.sqlite" : db) + "\n";
  for (const auto& [u, t] : l.user_tokens) o += "user." + u + " = " + t + "\n";
  for (int i = 0; i < 3; ++i) {
    std::string n = std::to_string(i + 1);
    o += "party." + n + ".token = " + party_tok[i] + "\n";
    o += "party." + n + ".url = http://127.0.0.1:" + std::to_string(http_port[i]) + "\n";
    o += "party." + n + ".api_token = " + api_tok[i] + "\n";
    o += "party." + n + ".pk = party" + n + ".pub\n";
  }
  o += "stream.flush_ms = " + std::to_string(opt.flush_ms) + "\n";
  o += "stream.max_batch = " + std::to_string(opt.max_stream_batch) + "\n";
  o += "job.timeout_ms = " + std::to_string(opt.job_timeout_ms) + "\n";
  o += "log = obeliskd.log\n";
  l.obelisk_conf = (dir / "obeliskd.conf").string();
  write_file(l.obelisk_conf, o);

  write_file((dir / "cluster.json").string(),
             json{{"url", l.orchestrator_url}, {"users", l.user_tokens}, {"type", opt.type}}.dump(2));
  return l;
}

LocalCluster::LocalCluster(ClusterLayout layout) : layout_(std::move(layout)) {}

LocalCluster::~LocalCluster() { stop(); }

void LocalCluster::start() {
  auto kv = KvConfig::load(layout_.obelisk_conf);
  auto cfg = obelisk::ObeliskConfig::from_kv(kv);
  auto dispatch = std::make_shared<obelisk::HttpPartyDispatch>(cfg.party_urls, cfg.party_api_tokens);
  core_ = std::make_shared<obelisk::Orchestrator>(cfg, dispatch);
  for (int i = 0; i < 3; ++i) {
    parties_[i] = std::make_unique<party::PartyServer>(party::PartyConfig::load(layout_.party_conf[i]));
    parties_[i]->start();
  }
  auto listen = party::Endpoint::parse(kv.get("listen"));
  api_ = std::make_unique<obelisk::ObeliskServer>(core_);
  api_->start(listen.host, listen.port);
  core_->start();
}

void LocalCluster::stop() {
  if (core_) core_->stop();
  if (api_) api_->stop();
  for (auto& p : parties_) {
    if (p) p->stop();
  }
  api_.reset();
  for (auto& p : parties_) p.reset();
  core_.reset();
}

}  // namespace mpcpipe::cluster
