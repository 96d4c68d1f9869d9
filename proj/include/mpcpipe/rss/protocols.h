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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpcpipe/algebra/gf.h"
#include "mpcpipe/algebra/ring.h"
#include "mpcpipe/rss/session.h"
#include "mpcpipe/rss/share.h"

namespace mpcpipe::rss {

// Bitmask of recipients for open_to, bit i for party i (0-based).
inline constexpr uint8_t kAllParties = 0b111;

// Sacrifice repetitions per triple so that a corrupted triple survives with
// probability at most 2^-64. A single check in GF(2^8) misses with 2^-8 and in
// a GF(2) lane with 1/2. In Z_2^64 an error of 2-adic valuation v is missed
// with 2^(v-64), which is 1/2 in the worst case.
template <ShareAlgebra T>
constexpr int sacrifice_reps() {
  if constexpr (std::is_same_v<T, Gf8>) return 8;
  if constexpr (std::is_same_v<T, Gf2x64> || std::is_same_v<T, RingEl64>) return 64;
  return 1;
}

template <ShareAlgebra T>
struct TripleBatch {
  uint64_t id = 0;
  ShareVec<T> a, b, c;
  size_t size() const { return a.size(); }
};

// Sharing of fresh PRF randomness; no communication.
template <ShareAlgebra T>
ShareVec<T> random_shares(Session& s, size_t n);

// This party's summand of a 3-out-of-3 sharing of zero; no communication.
template <ShareAlgebra T>
std::vector<T> zero_summands(Session& s, size_t n);

// Turns a 3-out-of-3 additive sharing (already masked by zero_summands) into a
// replicated one: one message to the previous party.
template <ShareAlgebra T>
ShareVec<T> reshare(Session& s, std::vector<T> z);

// Reveals x to the parties in `recipients`. Non-recipients get nullopt. In
// mal-lite every recipient receives the missing component from both holders
// and aborts with open-inconsistent on disagreement.
template <ShareAlgebra T>
std::optional<std::vector<T>> open_to(Session& s, const ShareVec<T>& x, uint8_t recipients);

// Broadcast open; the values are absorbed into the session transcript.
template <ShareAlgebra T>
std::vector<T> open(Session& s, const ShareVec<T>& x);

// Shares values known to `owner` only. Other parties pass an empty span.
template <ShareAlgebra T>
ShareVec<T> input(Session& s, int owner, std::span<const T> values, size_t n);

template <ShareAlgebra T>
TripleBatch<T> triple_gen(Session& s, size_t n);

template <ShareAlgebra T>
ShareVec<T> mul_beaver(Session& s, const ShareVec<T>& x, const ShareVec<T>& y, TripleBatch<T>& t);

// Cuts a batch into independently consumable pieces; the parent becomes used.
template <ShareAlgebra T>
std::vector<TripleBatch<T>> split_triples(Session& s, TripleBatch<T>&& t,
                                          std::span<const size_t> sizes) {
  s.consume_triples(t.id, 0);
  std::vector<TripleBatch<T>> out;
  out.reserve(sizes.size());
  size_t off = 0;
  for (size_t n : sizes) {
    if (off + n > t.size()) throw std::invalid_argument("split_triples: batch too small");
    TripleBatch<T> p;
    p.id = s.register_triples();
    auto sub = [&](const ShareVec<T>& v) {
      return ShareVec<T>(v.begin() + static_cast<std::ptrdiff_t>(off),
                         v.begin() + static_cast<std::ptrdiff_t>(off + n));
    };
    p.a = sub(t.a);
    p.b = sub(t.b);
    p.c = sub(t.c);
    out.push_back(std::move(p));
    off += n;
  }
  return out;
}

// triple_gen followed by mul_beaver.
template <ShareAlgebra T>
ShareVec<T> mul(Session& s, const ShareVec<T>& x, const ShareVec<T>& y);

// Public randomness from opening a PRF sharing; unpredictable to any single
// party before the open.
crypto::CtrStream joint_coin(Session& s);

// Gf128 products checked through the tower representation.
void verify_gf128_products(Session& s, std::span<const Gf128Product> batch);
// Verifies and clears the session's pending queue.
void verify_pending_gf128(Session& s);

}  // namespace mpcpipe::rss
