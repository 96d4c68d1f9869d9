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
#include <map>
#include <memory>
#include <string>

#include "mpcpipe/common/crypto.h"
#include "mpcpipe/common/kvconfig.h"
#include "mpcpipe/rss/session.h"

namespace mpcpipe::party {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;

  static Endpoint parse(const std::string& s);  // "host:port"
  std::string str() const { return host + ":" + std::to_string(port); }
};

// Party index is 0-based in memory and 1-based in files and on the wire to
// the orchestrator.
struct PartyConfig {
  int index = 0;
  std::shared_ptr<crypto::RsaKey> sk;
  std::array<std::shared_ptr<crypto::RsaKey>, 3> pk;
  std::array<Bytes, 3> pk_moduli;
  std::array<Endpoint, 3> peers;  // MPC listen address of each party
  Endpoint http;                  // inbound job API
  std::string orchestrator_url;
  std::string orchestrator_token;  // this party's bearer token at the orchestrator
  std::string api_token;           // bearer token the orchestrator presents to us
  rss::PrfSeeds seeds;
  rss::SecurityMode mode = rss::SecurityMode::kSemiHonest;
  std::map<std::string, std::string> model_paths;  // analysis type -> share file
  std::chrono::milliseconds session_timeout{std::chrono::seconds(120)};
  std::string log_path;

  // Keys:
  //   party = 1..3          mode = sh | mal-lite
  //   sk = <pem path>       pk.1 .. pk.3 = <pem path>
  //   peer.1 .. peer.3 = host:port
  //   http = host:port      orchestrator = http://host:port
  //   orchestrator_token    api_token
  //   seed.prev, seed.next = 32 hex chars
  //   model.<type> = <share file>
  //   session_timeout_ms    log = <path>
  // Throws FormatError on a missing key or when SK does not match PK_i.
  static PartyConfig from_kv(const KvConfig& kv);
  static PartyConfig load(const std::string& path) { return from_kv(KvConfig::load(path)); }
};

}  // namespace mpcpipe::party
