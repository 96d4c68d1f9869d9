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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mpcpipe/algebra/gf.h"
#include "mpcpipe/algebra/ring.h"
#include "mpcpipe/rss/protocols.h"

namespace mpcpipe::convert {

using rss::Session;
using rss::ShareVec;

// XOR sharing of `count` integers of `width` bits, bit-sliced: planes[b]
// holds bit b of all values, value i in lane i % 64 of word i / 64.
struct BitVecShare {
  size_t width = 0;
  size_t count = 0;
  std::vector<ShareVec<Gf2x64>> planes;

  BitVecShare() = default;
  BitVecShare(size_t w, size_t n);

  static size_t words_for(size_t n) { return (n + 63) / 64; }
  size_t words() const { return words_for(count); }
};

// Bit-slices per-value own/next components (low `width` bits of each).
BitVecShare slice(size_t width, const std::vector<uint64_t>& own, const std::vector<uint64_t>& next);
// Inverse of slice on one component.
std::vector<uint64_t> unslice_own(const BitVecShare& x);
std::vector<uint64_t> unslice_next(const BitVecShare& x);

BitVecShare operator^(const BitVecShare& a, const BitVecShare& b);
// Flips every bit of the shared values (XOR with the all-ones constant).
BitVecShare flip(const BitVecShare& x, int party);
// Top bit as a width-1 vector; local.
BitVecShare msb(const BitVecShare& x);

// Bitwise AND, one Beaver round over packed GF(2) lanes.
BitVecShare and_gate(Session& s, const BitVecShare& a, const BitVecShare& b);

// Reveals the values to every party.
std::vector<uint64_t> open_values(Session& s, const BitVecShare& x);

// Ripple-carry adder mod 2^width; width - 1 AND rounds.
BitVecShare rca(Session& s, const BitVecShare& x, const BitVecShare& y);

// Arithmetic to boolean over Z_2^64 (two RCA passes over the components).
BitVecShare a2b(Session& s, const ShareVec<RingEl64>& x);

// Boolean to arithmetic with PRF masks r1 (parties 0, 1) and r2 (parties 1, 2).
ShareVec<RingEl64> b2a(Session& s, const BitVecShare& x);
// b2a with caller-supplied masks. A party passes the masks it knows and
// nullopt for the ones it does not.
ShareVec<RingEl64> b2a_masked(Session& s, const BitVecShare& x,
                              const std::optional<std::vector<uint64_t>>& r1,
                              const std::optional<std::vector<uint64_t>>& r2);

// Width-1 boolean sharing to a 0/1 ring sharing: b0 xor b1 = u + v - 2uv,
// applied twice.
ShareVec<RingEl64> bit_to_arith(Session& s, const BitVecShare& bit);

// Regrouping of XOR-shared bytes: value i takes bytes 8i..8i+7 little-endian.
BitVecShare bytes_to_bits64(const ShareVec<Gf8>& bytes);
ShareVec<Gf8> bits64_to_bytes(const BitVecShare& x);

}  // namespace mpcpipe::convert
