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

#include "mpcpipe/client/api.h"

#include <httplib.h>

#include <thread>

#include "mpcpipe/party/context.h"

namespace mpcpipe::client {

using nlohmann::json;

Api::Api(std::string base_url, std::string token) : base_(std::move(base_url)), token_(std::move(token)) {}

json Api::call(const std::string& method, const std::string& path, const std::string& body) const {
  httplib::Client c(base_);
  c.set_bearer_token_auth(token_);
  c.set_connection_timeout(5);
  c.set_read_timeout(60);
  auto res = method == "GET" ? c.Get(path) : c.Post(path, body, "application/json");
  if (!res) throw ApiFailure(0, "orchestrator unreachable at " + base_);
  if (res->status < 200 || res->status >= 300) {
    std::string msg = res->body;
    try {
      msg = json::parse(res->body).at("error").get<std::string>();
    } catch (const std::exception&) {
    }
    throw ApiFailure(res->status, method + " " + path + ": " + msg);
  }
  return res->body.empty() ? json::object() : json::parse(res->body);
}

void Api::ingest(uint64_t ts, const Bytes& record) const {
  call("POST", "/ingest", json{{"ts", ts}, {"record", base64_encode(record)}}.dump());
}

std::vector<uint64_t> Api::samples() const { return call("GET", "/samples").at("ids").get<std::vector<uint64_t>>(); }

std::array<crypto::RsaKey, 3> Api::party_keys() const {
  auto j = call("GET", "/parties");
  return {crypto::RsaKey::from_public_pem(j.at(0).at("pk")), crypto::RsaKey::from_public_pem(j.at(1).at("pk")),
          crypto::RsaKey::from_public_pem(j.at(2).at("pk"))};
}

std::string Api::request(const json& body) const { return call("POST", "/analysis", body.dump()).at("id"); }

json Api::analysis(const std::string& id) const { return call("GET", "/analysis/" + id); }

json Api::result(const std::string& id) const { return call("GET", "/result/" + id); }

json Api::wait_result(const std::string& id, std::chrono::milliseconds limit) const {
  auto end = std::chrono::steady_clock::now() + limit;
  for (;;) {
    auto r = result(id);
    if (r.at("state") == "done" || r.at("state") == "failed") return r;
    if (std::chrono::steady_clock::now() >= end) return r;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

uint64_t device_send(const Api& api, DeviceState& st, const std::vector<double>& sample) {
  uint64_t ts = std::max(party::now_ms(), st.last_ts + 1);
  Bytes rec = device_encrypt(st, sample);
  api.ingest(ts, rec);
  st.last_ts = ts;
  return ts;
}

namespace {

std::array<const crypto::RsaKey*, 3> ptrs(const std::array<crypto::RsaKey, 3>& pks) {
  return {&pks[0], &pks[1], &pks[2]};
}

json envelope_json(const std::array<Bytes, 3>& env) {
  json e = json::array();
  for (const auto& x : env) e.push_back(base64_encode(x));
  return e;
}

}  // namespace

std::string request_adhoc(const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                          const std::string& type, const std::vector<uint64_t>& ids) {
  party::AnalysisSpec a;
  a.user = st.user;
  a.type = type;
  a.data_ids = ids;
  auto env = make_keyshares(st.key, a, ptrs(pks));
  return api.request({{"mode", "adhoc"}, {"type", type}, {"data_ids", ids}, {"envelopes", envelope_json(env)}});
}

std::string request_stream(const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks,
                           const std::string& type, uint64_t t_begin, uint64_t t_end, uint64_t batch) {
  party::AnalysisSpec a;
  a.user = st.user;
  a.type = type;
  a.mode = party::Mode::kStream;
  a.t_begin = t_begin;
  a.t_end = t_end;
  auto env = make_keyshares(st.key, a, ptrs(pks));
  return api.request({{"mode", "stream"},
                      {"type", type},
                      {"t_begin", t_begin},
                      {"t_end", t_end},
                      {"batch_size", batch},
                      {"envelopes", envelope_json(env)}});
}

std::optional<std::vector<std::array<double, aesgcm::kClasses>>> fetch_result(
    const Api& api, const DeviceState& st, const std::array<crypto::RsaKey, 3>& pks, const std::string& id) {
  auto r = api.result(id);
  if (r.at("state") != "done") return std::nullopt;
  aesgcm::ResultContext ctx{st.user, {pks[0].modulus(), pks[1].modulus(), pks[2].modulus()}, id,
                            r.at("type").get<std::string>()};
  return decrypt_result(st.key, ctx, base64_decode(r.at("ct").get<std::string>()));
}

}  // namespace mpcpipe::client
