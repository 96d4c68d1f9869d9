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

// obeliskd: the storage and orchestration service.

#include <CLI11.hpp>

#include "daemon.h"
#include "mpcpipe/common/kvconfig.h"
#include "mpcpipe/obelisk/orchestrator.h"
#include "mpcpipe/obelisk/server.h"
#include "mpcpipe/party/config.h"

int main(int argc, char** argv) {
  using namespace mpcpipe;
  CLI::App app{"storage, key store and job dispatcher for the three computing parties"};
  std::string config, level = "info";
  app.add_option("-c,--config", config, "key = value config file")->required()->check(CLI::ExistingFile);
  app.add_option("--log-level", level, "trace|debug|info|warn|error");
  CLI11_PARSE(app, argc, argv);

  tools::block_signals();
  try {
    auto kv = KvConfig::load(config);
    tools::setup_logging("obeliskd", kv.has("log") ? kv.path("log") : "", level);
    auto cfg = obelisk::ObeliskConfig::from_kv(kv);
    auto listen = party::Endpoint::parse(kv.get_or("listen", "127.0.0.1:8080"));
    auto dispatch = std::make_shared<obelisk::HttpPartyDispatch>(cfg.party_urls, cfg.party_api_tokens);
    auto core = std::make_shared<obelisk::Orchestrator>(cfg, dispatch);
    obelisk::ObeliskServer api(core);
    int port = api.start(listen.host, listen.port);
    core->start();
    spdlog::info("listening on {}:{}", listen.host, port);
    int sig = tools::wait_for_signal();
    spdlog::info("signal {}, shutting down", sig);
    core->stop();
    api.stop();
  } catch (const std::exception& e) {
    spdlog::critical("{}", e.what());
    return 1;
  }
  return 0;
}
