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
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>

#include "mpcpipe/party/config.h"
#include "mpcpipe/rss/channel.h"

namespace mpcpipe::party {

// Persistent TCP links to the two other parties, one per pair. The higher
// index dials the lower one; both sides exchange a hello carrying their index
// and a digest of the public-key set so that a misconfigured peer is refused.
// Dead links are re-established lazily by links().
class PeerMesh {
 public:
  PeerMesh(int index, std::array<Endpoint, 3> peers, Bytes cluster_tag);
  ~PeerMesh();
  PeerMesh(const PeerMesh&) = delete;
  PeerMesh& operator=(const PeerMesh&) = delete;

  void start();
  void stop();
  int listen_port() const;

  // {to_next, to_prev}; throws NetworkError if a peer is not reachable within `wait`.
  std::pair<std::shared_ptr<rss::PeerLink>, std::shared_ptr<rss::PeerLink>> links(std::chrono::milliseconds wait);

  static Bytes cluster_tag(const std::array<Bytes, 3>& pk_moduli);

 private:
  void accept_loop();
  bool usable(int peer) const;
  std::shared_ptr<rss::TcpLink> dial(int peer, std::chrono::steady_clock::time_point deadline);

  int index_;
  std::array<Endpoint, 3> peers_;
  Bytes tag_;
  std::unique_ptr<rss::TcpListener> listener_;
  std::thread acceptor_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::array<std::shared_ptr<rss::TcpLink>, 3> link_;
};

}  // namespace mpcpipe::party
