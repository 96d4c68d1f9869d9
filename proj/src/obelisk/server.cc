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

#include "mpcpipe/obelisk/server.h"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "mpcpipe/common/error.h"
#include "mpcpipe/party/context.h"

namespace mpcpipe::obelisk {
namespace {

using nlohmann::json;

std::string bearer(const httplib::Request& req) {
  const std::string h = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  return h.compare(0, prefix.size(), prefix) == 0 ? h.substr(prefix.size()) : "";
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::vector<uint64_t> parse_ids(const std::string& list) {
  std::vector<uint64_t> ids;
  size_t at = 0;
  while (at < list.size()) {
    size_t comma = list.find(',', at);
    if (comma == std::string::npos) comma = list.size();
    try {
      ids.push_back(std::stoull(list.substr(at, comma - at)));
    } catch (const std::exception&) {
      throw ApiError(400, "bad ID list");
    }
    at = comma + 1;
  }
  return ids;
}

}  // namespace

ObeliskServer::ObeliskServer(std::shared_ptr<Orchestrator> core) : core_(std::move(core)) {}

ObeliskServer::~ObeliskServer() { stop(); }

int ObeliskServer::start(const std::string& host, int port) {
  http_ = std::make_unique<httplib::Server>();
  auto& core = *core_;
  // Wraps a handler with authentication and error mapping.
  auto route = [&core](auto fn) {
    return [&core, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        Principal who = core.authenticate(bearer(req));
        fn(who, req, res);
      } catch (const ApiError& e) {
        reply(res, e.status(), {{"error", e.what()}});
      } catch (const json::exception& e) {
        reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
      } catch (const FormatError& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const std::exception& e) {
        spdlog::error("handler error on {} {}: {}", req.method, req.path, e.what());
        reply(res, 500, {{"error", "internal error"}});
      }
    };
  };
  auto require = [](const Principal& who) {
    if (who.kind == Principal::Kind::kNone) throw ApiError(401, "missing or unknown bearer token");
  };

  http_->Post("/ingest", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    auto body = json::parse(req.body);
    core.ingest(who, body.at("ts").get<uint64_t>(), base64_decode(body.at("record").get<std::string>()), party::now_ms());
    res.status = 204;
  }));
  http_->Get("/samples", route([&core, require](const Principal& who, const httplib::Request&, httplib::Response& res) {
    require(who);
    reply(res, 200, {{"ids", core.list_samples(who)}});
  }));
  http_->Post("/analysis", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    auto id = core.request_analysis(who, json::parse(req.body), party::now_ms());
    reply(res, 201, {{"id", id}});
  }));
  http_->Get(R"(/analysis/([^/]+))", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    reply(res, 200, core.get_analysis(who, req.matches[1]));
  }));
  http_->Get(R"(/result/([^/]+))", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    reply(res, 200, core.get_result(who, req.matches[1]));
  }));
  http_->Post(R"(/result/([^/]+))", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    reply(res, 200, core.accept_result(who, req.matches[1], json::parse(req.body), party::now_ms()));
  }));
  http_->Get("/data", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    auto recs = core.get_data(who, req.get_param_value("user"), parse_ids(req.get_param_value("ids")));
    json arr = json::array();
    for (const auto& r : recs) arr.push_back(r ? json(base64_encode(*r)) : json(nullptr));
    reply(res, 200, {{"records", arr}});
  }));
  http_->Get(R"(/keyshare/([^/]+)/([0-9]+))", route([&core, require](const Principal& who, const httplib::Request& req, httplib::Response& res) {
    require(who);
    auto env = core.get_keyshare(who, req.matches[1], std::stoi(req.matches[2]));
    reply(res, 200, {{"envelope", base64_encode(env)}});
  }));
  http_->Get("/parties", [&core](const httplib::Request&, httplib::Response& res) { reply(res, 200, core.parties()); });
  http_->Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"ok", true}}); });

  int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw NetworkError("cannot bind orchestrator API on " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  return bound;
}

void ObeliskServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mpcpipe::obelisk
