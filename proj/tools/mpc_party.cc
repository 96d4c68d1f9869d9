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

// mpc-party: one of the three computing parties.

#include <CLI11.hpp>

#include "daemon.h"
#include "mpcpipe/party/config.h"
#include "mpcpipe/party/server.h"

int main(int argc, char** argv) {
  using namespace mpcpipe;
  CLI::App app{"computing party: runs analysis jobs on shared data"};
  std::string config, level = "info";
  app.add_option("-c,--config", config, "key = value config file")->required()->check(CLI::ExistingFile);
  app.add_option("--log-level", level, "trace|debug|info|warn|error");
  CLI11_PARSE(app, argc, argv);

  tools::block_signals();
  try {
    auto cfg = party::PartyConfig::load(config);
    tools::setup_logging("party" + std::to_string(cfg.index + 1), cfg.log_path, level);
    party::PartyServer server(cfg);
    server.start();
    spdlog::info("party {} up: http {} mpc {}", cfg.index + 1, server.http_port(), server.mpc_port());
    int sig = tools::wait_for_signal();
    spdlog::info("signal {}, shutting down", sig);
    server.stop();
  } catch (const std::exception& e) {
    spdlog::critical("{}", e.what());
    return 1;
  }
  return 0;
}
