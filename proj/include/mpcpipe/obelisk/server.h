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

#include <memory>
#include <string>
#include <thread>

#include "mpcpipe/obelisk/orchestrator.h"

namespace httplib {
class Server;
}

namespace mpcpipe::obelisk {

// HTTP+JSON surface of the orchestrator. Binary payloads travel as base64.
//   POST /ingest            {"ts", "record"}                 user
//   GET  /samples                                            user
//   POST /analysis          see Orchestrator::request_analysis user
//   GET  /analysis/{id}                                      owner or party
//   GET  /result/{id}                                        owner
//   GET  /parties                                            anyone
//   GET  /data?user=&ids=   {"records":[b64|null]}           party
//   GET  /keyshare/{id}/{p} {"envelope"}                     party p
//   POST /result/{id}       {"party", "ct"|"error"}          party
class ObeliskServer {
 public:
  explicit ObeliskServer(std::shared_ptr<Orchestrator> core);
  ~ObeliskServer();

  // Port 0 picks a free port; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  std::shared_ptr<Orchestrator> core_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
};

}  // namespace mpcpipe::obelisk
