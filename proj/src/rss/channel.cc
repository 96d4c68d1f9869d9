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

#include "mpcpipe/rss/channel.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "mpcpipe/common/error.h"
#include "mpcpipe/rss/local.h"

namespace mpcpipe::rss {

Bytes encode_frame(const Frame& f) {
  Bytes out;
  out.reserve(kFrameHeaderBytes + f.payload.size());
  put_u32_be(out, static_cast<uint32_t>(1 + f.session.size() + f.payload.size()));
  out.push_back(static_cast<uint8_t>(f.tag));
  append(out, f.session);
  append(out, f.payload);
  return out;
}

std::optional<std::pair<Frame, size_t>> decode_frame(ByteSpan buf) {
  if (buf.size() < 4) return std::nullopt;
  uint32_t len = get_u32_be(buf.data());
  if (len < 17 || len > kMaxFrameBytes) throw FormatError("bad frame length");
  if (buf.size() < 4 + size_t{len}) return std::nullopt;
  Frame f;
  f.tag = static_cast<MsgTag>(buf[4]);
  std::memcpy(f.session.data(), buf.data() + 5, 16);
  f.payload.assign(buf.begin() + 21, buf.begin() + 4 + len);
  return std::make_pair(std::move(f), 4 + size_t{len});
}

void Inbox::push(Frame f) {
  {
    std::lock_guard lk(mu_);
    queues_[f.session].push_back(std::move(f));
  }
  cv_.notify_all();
}

void Inbox::fail(const std::string& reason) {
  {
    std::lock_guard lk(mu_);
    if (!failure_) failure_ = reason;
  }
  cv_.notify_all();
}

Frame Inbox::pop(const SessionId& session, std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  auto ready = [&] {
    auto it = queues_.find(session);
    return (it != queues_.end() && !it->second.empty()) || failure_.has_value();
  };
  if (!cv_.wait_for(lk, timeout, ready)) throw NetworkError("peer receive timed out");
  auto it = queues_.find(session);
  if (it == queues_.end() || it->second.empty()) throw NetworkError("peer link down: " + *failure_);
  Frame f = std::move(it->second.front());
  it->second.pop_front();
  return f;
}

void Inbox::drop_session(const SessionId& session) {
  std::lock_guard lk(mu_);
  queues_.erase(session);
}

namespace {

class MemoryLink : public PeerLink {
 public:
  explicit MemoryLink(std::shared_ptr<Inbox> mine) : mine_(std::move(mine)) {}

  void connect(std::weak_ptr<Inbox> peer) { peer_ = std::move(peer); }

  void send(const Frame& f) override {
    auto peer = peer_.lock();
    if (!peer || closed_) throw NetworkError("memory link closed");
    peer->push(f);
  }
  Frame recv(const SessionId& session, std::chrono::milliseconds timeout) override {
    return mine_->pop(session, timeout);
  }
  void drop_session(const SessionId& session) override { mine_->drop_session(session); }
  void close() override {
    closed_ = true;
    mine_->fail("closed locally");
    if (auto peer = peer_.lock()) peer->fail("closed by peer");
  }

 private:
  std::shared_ptr<Inbox> mine_;
  std::weak_ptr<Inbox> peer_;
  std::atomic<bool> closed_{false};
};

}  // namespace

std::pair<std::shared_ptr<PeerLink>, std::shared_ptr<PeerLink>> make_memory_link_pair() {
  auto ia = std::make_shared<Inbox>();
  auto ib = std::make_shared<Inbox>();
  auto a = std::make_shared<MemoryLink>(ia);
  auto b = std::make_shared<MemoryLink>(ib);
  // Each link keeps the peer's inbox alive only weakly; the inboxes are owned
  // by their links, which the two sides hold.
  a->connect(ib);
  b->connect(ia);
  return {a, b};
}

LocalLinks make_local_links() {
  LocalLinks l;
  for (int i = 0; i < 3; ++i) {
    auto [a, b] = make_memory_link_pair();
    l.to_next[i] = a;
    l.to_prev[(i + 1) % 3] = b;
  }
  return l;
}

TcpLink::TcpLink(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  reader_ = std::thread([this] { reader_loop(); });
}

TcpLink::~TcpLink() {
  close();
  if (reader_.joinable()) reader_.join();
  ::close(fd_);
}

void TcpLink::close() {
  if (closed_.exchange(true)) return;
  ::shutdown(fd_, SHUT_RDWR);
  inbox_.fail("closed locally");
}

bool TcpLink::alive() const { return !closed_; }

void TcpLink::send(const Frame& f) {
  Bytes wire = encode_frame(f);
  std::lock_guard lk(send_mu_);
  size_t off = 0;
  while (off < wire.size()) {
    ssize_t n = ::send(fd_, wire.data() + off, wire.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw NetworkError(std::string("peer send failed: ") + std::strerror(errno));
    off += static_cast<size_t>(n);
  }
}

Frame TcpLink::recv(const SessionId& session, std::chrono::milliseconds timeout) {
  return inbox_.pop(session, timeout);
}

void TcpLink::reader_loop() {
  Bytes buf;
  std::array<uint8_t, 1 << 16> chunk;
  try {
    for (;;) {
      ssize_t n = ::recv(fd_, chunk.data(), chunk.size(), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buf.insert(buf.end(), chunk.begin(), chunk.begin() + n);
      size_t off = 0;
      while (auto d = decode_frame(ByteSpan(buf).subspan(off))) {
        off += d->second;
        inbox_.push(std::move(d->first));
      }
      if (off) buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(off));
    }
  } catch (const std::exception& e) {
    inbox_.fail(e.what());
    return;
  }
  inbox_.fail("connection closed");
}

std::shared_ptr<TcpLink> TcpLink::connect(const std::string& host, int port,
                                          std::chrono::steady_clock::time_point deadline) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  for (;;) {
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) == 0) {
      int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
      if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
        ::freeaddrinfo(res);
        return std::make_shared<TcpLink>(fd);
      }
      if (fd >= 0) ::close(fd);
      ::freeaddrinfo(res);
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw NetworkError("cannot connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

TcpListener::TcpListener(int port, const std::string& host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw NetworkError("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw NetworkError("bad listen address " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 16) != 0) {
    ::close(fd_);
    throw NetworkError("cannot listen on " + host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  close();
  ::close(fd_);
}

void TcpListener::close() {
  if (!closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

std::shared_ptr<TcpLink> TcpListener::accept() {
  for (;;) {
    int c = ::accept(fd_, nullptr, nullptr);
    if (c >= 0) return std::make_shared<TcpLink>(c);
    if (errno == EINTR) continue;
    return nullptr;
  }
}

}  // namespace mpcpipe::rss
