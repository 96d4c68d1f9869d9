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

#include "mpcpipe/party/config.h"

#include "mpcpipe/common/error.h"

namespace mpcpipe::party {
namespace {

rss::Seed parse_seed(const std::string& hex) {
  Bytes b = hex_decode(hex);
  if (b.size() != 16) throw FormatError("config: seeds are 16 bytes of hex");
  rss::Seed s{};
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos || colon + 1 == s.size()) throw FormatError("endpoint needs host:port: " + s);
  Endpoint e;
  if (colon > 0) e.host = s.substr(0, colon);
  try {
    e.port = std::stoi(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw FormatError("bad port in " + s);
  }
  if (e.port < 0 || e.port > 65535) throw FormatError("bad port in " + s);
  return e;
}

PartyConfig PartyConfig::from_kv(const KvConfig& kv) {
  PartyConfig c;
  long long idx = kv.get_int("party");
  if (idx < 1 || idx > 3) throw FormatError("config: party must be 1, 2 or 3");
  c.index = static_cast<int>(idx - 1);
  c.mode = rss::parse_security_mode(kv.get_or("mode", "sh"));
  c.sk = std::make_shared<crypto::RsaKey>(crypto::RsaKey::from_private_pem(read_file(kv.path("sk"))));
  for (int i = 0; i < 3; ++i) {
    std::string n = std::to_string(i + 1);
    c.pk[i] = std::make_shared<crypto::RsaKey>(crypto::RsaKey::from_public_pem(read_file(kv.path("pk." + n))));
    c.pk_moduli[i] = c.pk[i]->modulus();
    c.peers[i] = Endpoint::parse(kv.get("peer." + n));
  }
  if (c.sk->modulus() != c.pk_moduli[c.index]) throw FormatError("config: sk does not match pk." + std::to_string(idx));
  c.http = Endpoint::parse(kv.get("http"));
  c.orchestrator_url = kv.get("orchestrator");
  c.orchestrator_token = kv.get("orchestrator_token");
  c.api_token = kv.get("api_token");
  c.seeds.with_prev = parse_seed(kv.get("seed.prev"));
  c.seeds.with_next = parse_seed(kv.get("seed.next"));
  for (const auto& [type, _] : kv.with_prefix("model.")) c.model_paths[type] = kv.path("model." + type);
  c.session_timeout = std::chrono::milliseconds(kv.get_int_or("session_timeout_ms", 120000));
  if (kv.has("log")) c.log_path = kv.path("log");
  return c;
}

}  // namespace mpcpipe::party
