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
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mpcpipe/common/crypto.h"
#include "mpcpipe/rss/channel.h"
#include "mpcpipe/rss/share.h"

namespace mpcpipe::rss {

enum class SecurityMode { kSemiHonest, kMalLite };

const char* to_string(SecurityMode m);
SecurityMode parse_security_mode(const std::string& s);  // "sh" | "mal-lite"

using Seed = std::array<uint8_t, 16>;

// Pairwise seeds as seen by one party.
struct PrfSeeds {
  Seed with_prev{};  // shared with party i-1
  Seed with_next{};  // shared with party i+1
};

// Deterministic setup for three local parties: seed_{i,i+1} is derived from
// `master` and party i receives (seed_{i-1,i}, seed_{i,i+1}).
std::array<PrfSeeds, 3> derive_local_seeds(uint64_t master);

SessionId make_session_id(std::string_view label);

struct SessionStats {
  uint64_t messages_sent = 0;
  uint64_t bytes_sent = 0;
  uint64_t rounds = 0;
  uint64_t opened_elements = 0;
  uint64_t and_gates = 0;  // GF(2) lane products evaluated on shares
  uint64_t triples_generated = 0;
  uint64_t triples_consumed = 0;
  uint64_t gf128_products_verified = 0;
  double preprocessing_seconds = 0;
};

struct Gf128Product {
  Share<Gf128> u, v, w;
};

enum class Peer { kNext, kPrev };

// Per-party state of one protocol run. Not thread-safe; one thread per party
// per session.
class Session {
 public:
  Session(int party, SessionId id, SecurityMode mode, const PrfSeeds& seeds,
          std::shared_ptr<PeerLink> to_next, std::shared_ptr<PeerLink> to_prev,
          std::chrono::milliseconds timeout = std::chrono::seconds(120));
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  int party() const { return party_; }
  int next_party() const { return (party_ + 1) % 3; }
  int prev_party() const { return (party_ + 2) % 3; }
  SecurityMode mode() const { return mode_; }
  bool mal() const { return mode_ == SecurityMode::kMalLite; }
  const SessionId& id() const { return id_; }

  crypto::CtrStream& prf_prev() { return prf_prev_; }
  crypto::CtrStream& prf_next() { return prf_next_; }

  template <ShareAlgebra T>
  std::vector<T> draw(crypto::CtrStream& s, size_t n) {
    std::vector<uint8_t> buf(n * T::kBytes);
    s.fill(buf);
    return read_elems<T>(buf, n);
  }

  void send(Peer to, MsgTag tag, Bytes payload);
  // Throws ProtocolAbort(peer-abort) if the peer announced an abort, and
  // FormatError on an unexpected tag or payload size.
  Bytes recv(Peer from, MsgTag tag, std::optional<size_t> expected_size = std::nullopt);

  // Sends an abort notice to both peers and throws ProtocolAbort(code).
  [[noreturn]] void fail(const std::string& code, const std::string& detail = "");
  // Best-effort abort notice after a local failure; never throws.
  void notify_abort(const std::string& code) noexcept;

  void absorb_transcript(ByteSpan opened);
  // Exchanges transcript digests with both peers; aborts on mismatch.
  void finish();
  crypto::Digest transcript_digest() const { return transcript_.peek(); }

  uint64_t register_triples();
  // Marks a triple batch used; rejects a second use.
  void consume_triples(uint64_t id, size_t count);

  // Fault injection for tests: protocols pass named outgoing payloads through
  // the hook before use, so a hook models a deviating party.
  using TamperHook = std::function<void(int party, std::string_view point, Bytes& payload)>;
  void set_tamper_hook(TamperHook hook) { tamper_hook_ = std::move(hook); }
  void tamper(std::string_view point, Bytes& payload);

  std::vector<Gf128Product>& pending_gf128() { return pending_gf128_; }

  SessionStats& stats() { return stats_; }
  const SessionStats& stats() const { return stats_; }

 private:
  PeerLink& link(Peer p) { return p == Peer::kNext ? *to_next_ : *to_prev_; }

  int party_;
  SessionId id_;
  SecurityMode mode_;
  std::shared_ptr<PeerLink> to_next_, to_prev_;
  std::chrono::milliseconds timeout_;
  crypto::CtrStream prf_prev_, prf_next_;
  crypto::Sha256 transcript_;
  uint64_t next_triple_id_ = 1;
  std::unordered_set<uint64_t> consumed_;
  std::vector<Gf128Product> pending_gf128_;
  SessionStats stats_;
  TamperHook tamper_hook_;
  bool aborted_ = false;
};

}  // namespace mpcpipe::rss
