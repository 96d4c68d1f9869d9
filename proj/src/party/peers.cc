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

#include "mpcpipe/party/peers.h"

#include <spdlog/spdlog.h>

#include "mpcpipe/common/error.h"

namespace mpcpipe::party {
namespace {

constexpr rss::SessionId kHelloSession{};
constexpr auto kHelloTimeout = std::chrono::seconds(5);

Bytes hello_payload(int index, const Bytes& tag) {
  Bytes p(1 + tag.size());
  p[0] = static_cast<uint8_t>(index);
  std::copy(tag.begin(), tag.end(), p.begin() + 1);
  return p;
}

// Returns the sender index or -1 when the hello is malformed or the tag differs.
int read_hello(rss::TcpLink& link, const Bytes& tag) {
  rss::Frame f = link.recv(kHelloSession, kHelloTimeout);
  if (f.tag != rss::MsgTag::kHello || f.payload.size() != 1 + tag.size()) return -1;
  if (!std::equal(tag.begin(), tag.end(), f.payload.begin() + 1)) return -1;
  return f.payload[0] < 3 ? f.payload[0] : -1;
}

}  // namespace

PeerMesh::PeerMesh(int index, std::array<Endpoint, 3> peers, Bytes cluster_tag)
    : index_(index), peers_(std::move(peers)), tag_(std::move(cluster_tag)) {}

PeerMesh::~PeerMesh() { stop(); }

Bytes PeerMesh::cluster_tag(const std::array<Bytes, 3>& pk_moduli) {
  Bytes all;
  for (const auto& m : pk_moduli) put_field(all, m);
  auto d = crypto::sha256(all);
  return Bytes(d.begin(), d.end());
}

void PeerMesh::start() {
  // Party 0 accepts two peers, party 1 one, party 2 none.
  if (index_ < 2) {
    const auto& me = peers_[index_];
    listener_ = std::make_unique<rss::TcpListener>(me.port, me.host);
    acceptor_ = std::thread([this] { accept_loop(); });
  }
}

void PeerMesh::stop() {
  if (listener_) listener_->close();
  if (acceptor_.joinable()) acceptor_.join();
  std::lock_guard lk(mu_);
  for (auto& l : link_) {
    if (l) l->close();
    l.reset();
  }
}

int PeerMesh::listen_port() const { return listener_ ? listener_->port() : -1; }

void PeerMesh::accept_loop() {
  for (;;) {
    auto link = listener_->accept();
    if (!link) return;
    try {
      int peer = read_hello(*link, tag_);
      if (peer <= index_) {
        spdlog::warn("party {}: refused peer connection with bad hello", index_ + 1);
        link->close();
        continue;
      }
      link->send(rss::Frame{rss::MsgTag::kHello, kHelloSession, hello_payload(index_, tag_)});
      std::lock_guard lk(mu_);
      if (link_[peer]) link_[peer]->close();
      link_[peer] = link;
      cv_.notify_all();
      spdlog::info("party {}: accepted party {}", index_ + 1, peer + 1);
    } catch (const std::exception& e) {
      spdlog::warn("party {}: peer handshake failed: {}", index_ + 1, e.what());
      link->close();
    }
  }
}

bool PeerMesh::usable(int peer) const { return link_[peer] && link_[peer]->alive(); }

std::shared_ptr<rss::TcpLink> PeerMesh::dial(int peer, std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    auto link = rss::TcpLink::connect(peers_[peer].host, peers_[peer].port, deadline);
    link->send(rss::Frame{rss::MsgTag::kHello, kHelloSession, hello_payload(index_, tag_)});
    try {
      if (read_hello(*link, tag_) == peer) return link;
    } catch (const NetworkError&) {
    }
    link->close();
    if (std::chrono::steady_clock::now() >= deadline) {
      throw NetworkError("handshake with party " + std::to_string(peer + 1) + " failed");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

std::pair<std::shared_ptr<rss::PeerLink>, std::shared_ptr<rss::PeerLink>> PeerMesh::links(
    std::chrono::milliseconds wait) {
  auto deadline = std::chrono::steady_clock::now() + wait;
  for (int peer = 0; peer < index_; ++peer) {
    bool ok;
    {
      std::lock_guard lk(mu_);
      ok = usable(peer);
    }
    if (ok) continue;
    auto link = dial(peer, deadline);
    std::lock_guard lk(mu_);
    if (link_[peer]) link_[peer]->close();
    link_[peer] = link;
  }
  std::unique_lock lk(mu_);
  for (int peer = index_ + 1; peer < 3; ++peer) {
    if (!cv_.wait_until(lk, deadline, [&] { return usable(peer); })) {
      throw NetworkError("party " + std::to_string(peer + 1) + " did not connect");
    }
  }
  int next = (index_ + 1) % 3, prev = (index_ + 2) % 3;
  return {link_[next], link_[prev]};
}

}  // namespace mpcpipe::party
