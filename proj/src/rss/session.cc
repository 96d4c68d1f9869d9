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

#include "mpcpipe/rss/session.h"

#include <cstring>

#include "mpcpipe/common/error.h"

namespace mpcpipe::rss {

namespace {

crypto::CtrStream session_stream(const Seed& seed, const SessionId& id) {
  Bytes in = to_bytes("mpcpipe/prf");
  append(in, seed);
  append(in, id);
  auto d = crypto::sha256(in);
  return crypto::CtrStream(ByteSpan(d.data(), 16));
}

}  // namespace

const char* to_string(SecurityMode m) {
  return m == SecurityMode::kMalLite ? "mal-lite" : "sh";
}

SecurityMode parse_security_mode(const std::string& s) {
  if (s == "sh") return SecurityMode::kSemiHonest;
  if (s == "mal-lite") return SecurityMode::kMalLite;
  throw std::invalid_argument("unknown security mode: " + s);
}

std::array<PrfSeeds, 3> derive_local_seeds(uint64_t master) {
  std::array<Seed, 3> pair{};  // pair[i] = seed_{i,i+1}
  for (int i = 0; i < 3; ++i) {
    Bytes in = to_bytes("mpcpipe/local-seed");
    put_u64_be(in, master);
    in.push_back(static_cast<uint8_t>(i));
    auto d = crypto::sha256(in);
    std::memcpy(pair[i].data(), d.data(), 16);
  }
  std::array<PrfSeeds, 3> out{};
  for (int i = 0; i < 3; ++i) out[i] = PrfSeeds{pair[(i + 2) % 3], pair[i]};
  return out;
}

SessionId make_session_id(std::string_view label) {
  auto d = crypto::sha256(ByteSpan(reinterpret_cast<const uint8_t*>(label.data()), label.size()));
  SessionId id{};
  std::memcpy(id.data(), d.data(), id.size());
  return id;
}

Session::Session(int party, SessionId id, SecurityMode mode, const PrfSeeds& seeds,
                 std::shared_ptr<PeerLink> to_next, std::shared_ptr<PeerLink> to_prev,
                 std::chrono::milliseconds timeout)
    : party_(party),
      id_(id),
      mode_(mode),
      to_next_(std::move(to_next)),
      to_prev_(std::move(to_prev)),
      timeout_(timeout),
      prf_prev_(session_stream(seeds.with_prev, id)),
      prf_next_(session_stream(seeds.with_next, id)) {
  if (party < 0 || party > 2) throw std::invalid_argument("party index out of range");
}

Session::~Session() {
  to_next_->drop_session(id_);
  to_prev_->drop_session(id_);
}

void Session::send(Peer to, MsgTag tag, Bytes payload) {
  stats_.messages_sent++;
  stats_.bytes_sent += kFrameHeaderBytes + payload.size();
  link(to).send(Frame{tag, id_, std::move(payload)});
}

Bytes Session::recv(Peer from, MsgTag tag, std::optional<size_t> expected_size) {
  Frame f = link(from).recv(id_, timeout_);
  if (f.tag == MsgTag::kAbort) {
    std::string code = mpcpipe::to_string(f.payload);
    // Forward to the other peer so that it does not wait on us.
    Peer other = from == Peer::kNext ? Peer::kPrev : Peer::kNext;
    if (!aborted_) {
      aborted_ = true;
      try {
        link(other).send(Frame{MsgTag::kAbort, id_, f.payload});
      } catch (const std::exception&) {
      }
    }
    throw ProtocolAbort(abort_code::kPeerAbort, code);
  }
  if (f.tag != tag) {
    notify_abort("unexpected-message");
    throw FormatError("unexpected message tag " + std::to_string(static_cast<int>(f.tag)));
  }
  if (expected_size && f.payload.size() != *expected_size) {
    notify_abort("unexpected-message");
    throw FormatError("unexpected payload size");
  }
  return std::move(f.payload);
}

void Session::notify_abort(const std::string& code) noexcept {
  if (aborted_) return;
  aborted_ = true;
  for (Peer p : {Peer::kNext, Peer::kPrev}) {
    try {
      link(p).send(Frame{MsgTag::kAbort, id_, to_bytes(code)});
    } catch (const std::exception&) {
    }
  }
}

void Session::fail(const std::string& code, const std::string& detail) {
  notify_abort(code);
  throw ProtocolAbort(code, detail);
}

void Session::tamper(std::string_view point, Bytes& payload) {
  if (tamper_hook_) tamper_hook_(party_, point, payload);
}

void Session::absorb_transcript(ByteSpan opened) { transcript_.update(opened); }

void Session::finish() {
  auto d = transcript_.peek();
  Bytes mine(d.begin(), d.end());
  send(Peer::kNext, MsgTag::kDigest, mine);
  send(Peer::kPrev, MsgTag::kDigest, mine);
  Bytes from_prev = recv(Peer::kPrev, MsgTag::kDigest, d.size());
  Bytes from_next = recv(Peer::kNext, MsgTag::kDigest, d.size());
  stats_.rounds++;
  if (from_prev != mine || from_next != mine) fail(abort_code::kTranscriptMismatch);
}

uint64_t Session::register_triples() { return next_triple_id_++; }

void Session::consume_triples(uint64_t id, size_t count) {
  if (id == 0 || id >= next_triple_id_ || !consumed_.insert(id).second) {
    fail(abort_code::kTripleReuse, "triple batch " + std::to_string(id));
  }
  stats_.triples_consumed += count;
}

}  // namespace mpcpipe::rss
