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
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "mpcpipe/common/bytes.h"

namespace mpcpipe::rss {

using SessionId = std::array<uint8_t, 16>;

enum class MsgTag : uint8_t {
  kOpen = 1,
  kReshare = 2,
  kInput = 3,
  kDigest = 4,
  kAbort = 5,
  kControl = 6,
  kHello = 7,
};

struct Frame {
  MsgTag tag = MsgTag::kOpen;
  SessionId session{};
  Bytes payload;
};

// Wire layout: u32 big-endian length of everything after the length field,
// then the tag byte, the 16-byte session id and the payload.
inline constexpr size_t kFrameHeaderBytes = 4 + 1 + 16;
inline constexpr uint32_t kMaxFrameBytes = 1u << 30;

Bytes encode_frame(const Frame& f);
// Decodes one frame from the front of `buf`; returns the frame and the number
// of bytes consumed, or nullopt if `buf` holds an incomplete frame. Throws
// FormatError on a malformed header.
std::optional<std::pair<Frame, size_t>> decode_frame(ByteSpan buf);

// Received frames demultiplexed by session id so that a frame for a session
// that has not started yet waits for it instead of being misdelivered.
class Inbox {
 public:
  void push(Frame f);
  // Marks the connection dead; pending and future recv() calls throw.
  void fail(const std::string& reason);
  Frame pop(const SessionId& session, std::chrono::milliseconds timeout);
  void drop_session(const SessionId& session);

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<SessionId, std::deque<Frame>> queues_;
  std::optional<std::string> failure_;
};

// Ordered, reliable, bidirectional frame pipe to one peer.
class PeerLink {
 public:
  virtual ~PeerLink() = default;
  virtual void send(const Frame& f) = 0;
  virtual Frame recv(const SessionId& session, std::chrono::milliseconds timeout) = 0;
  virtual void drop_session(const SessionId& session) = 0;
  virtual void close() = 0;
};

// Two linked in-memory endpoints.
std::pair<std::shared_ptr<PeerLink>, std::shared_ptr<PeerLink>> make_memory_link_pair();

// TCP endpoint over an already connected socket. A reader thread drains the
// socket into an Inbox so that a blocked send can never deadlock against the
// peer's blocked send.
class TcpLink : public PeerLink {
 public:
  explicit TcpLink(int fd);
  ~TcpLink() override;

  void send(const Frame& f) override;
  Frame recv(const SessionId& session, std::chrono::milliseconds timeout) override;
  void drop_session(const SessionId& session) override { inbox_.drop_session(session); }
  void close() override;
  bool alive() const;

  // Blocking connect with retries until `deadline`.
  static std::shared_ptr<TcpLink> connect(const std::string& host, int port,
                                          std::chrono::steady_clock::time_point deadline);

 private:
  void reader_loop();

  int fd_;
  std::mutex send_mu_;
  Inbox inbox_;
  std::thread reader_;
  std::atomic<bool> closed_{false};
};

// Listening socket that accepts TcpLinks.
class TcpListener {
 public:
  explicit TcpListener(int port, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  // Returns nullptr once close() has been called.
  std::shared_ptr<TcpLink> accept();
  void close();

 private:
  int fd_;
  int port_;
  std::atomic<bool> closed_{false};
};

}  // namespace mpcpipe::rss
