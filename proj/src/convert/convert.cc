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

#include "mpcpipe/convert/convert.h"

#include <array>
#include <stdexcept>

namespace mpcpipe::convert {

using rss::Share;

namespace {

std::vector<uint64_t> unslice_words(const std::vector<std::vector<uint64_t>>& planes, size_t count) {
  std::vector<uint64_t> v(count, 0);
  for (size_t b = 0; b < planes.size(); ++b) {
    for (size_t i = 0; i < count; ++i) v[i] |= ((planes[b][i / 64] >> (i % 64)) & 1) << b;
  }
  return v;
}

std::vector<std::vector<uint64_t>> component_planes(const BitVecShare& x, bool own) {
  std::vector<std::vector<uint64_t>> p(x.width, std::vector<uint64_t>(x.words()));
  for (size_t b = 0; b < x.width; ++b) {
    for (size_t w = 0; w < x.words(); ++w) p[b][w] = own ? x.planes[b][w].own.v : x.planes[b][w].next.v;
  }
  return p;
}

ShareVec<Gf2x64> concat(const BitVecShare& x) {
  ShareVec<Gf2x64> v;
  v.reserve(x.width * x.words());
  for (const auto& p : x.planes) v.insert(v.end(), p.begin(), p.end());
  return v;
}

BitVecShare unconcat(size_t width, size_t count, const ShareVec<Gf2x64>& v) {
  BitVecShare r(width, count);
  const size_t W = r.words();
  for (size_t b = 0; b < width; ++b) {
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(b * W),
              v.begin() + static_cast<std::ptrdiff_t>((b + 1) * W), r.planes[b].begin());
  }
  return r;
}

ShareVec<Gf2x64> plane_xor(const ShareVec<Gf2x64>& a, const ShareVec<Gf2x64>& b) {
  ShareVec<Gf2x64> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

void check_same_shape(const BitVecShare& a, const BitVecShare& b) {
  if (a.width != b.width || a.count != b.count) throw std::invalid_argument("bit vector shape mismatch");
}

// Ring sharing with a single nonzero component j, built from values the
// holders of that component already know.
ShareVec<RingEl64> single_component(int party, int j, const std::vector<uint64_t>& own,
                                    const std::vector<uint64_t>& next) {
  ShareVec<RingEl64> r(own.size());
  for (size_t i = 0; i < own.size(); ++i) {
    if (party == j) r[i].own = RingEl64{own[i]};
    if ((party + 1) % 3 == j) r[i].next = RingEl64{next[i]};
  }
  return r;
}

}  // namespace

BitVecShare::BitVecShare(size_t w, size_t n)
    : width(w), count(n), planes(w, ShareVec<Gf2x64>(words_for(n))) {}

BitVecShare slice(size_t width, const std::vector<uint64_t>& own, const std::vector<uint64_t>& next) {
  BitVecShare r(width, own.size());
  for (size_t i = 0; i < own.size(); ++i) {
    const uint64_t o = own[i], q = next[i];
    const size_t w = i / 64, lane = i % 64;
    for (size_t b = 0; b < width; ++b) {
      r.planes[b][w].own.v |= ((o >> b) & 1) << lane;
      r.planes[b][w].next.v |= ((q >> b) & 1) << lane;
    }
  }
  return r;
}

std::vector<uint64_t> unslice_own(const BitVecShare& x) {
  return unslice_words(component_planes(x, true), x.count);
}

std::vector<uint64_t> unslice_next(const BitVecShare& x) {
  return unslice_words(component_planes(x, false), x.count);
}

BitVecShare operator^(const BitVecShare& a, const BitVecShare& b) {
  check_same_shape(a, b);
  BitVecShare r(a.width, a.count);
  for (size_t k = 0; k < a.width; ++k) r.planes[k] = plane_xor(a.planes[k], b.planes[k]);
  return r;
}

BitVecShare flip(const BitVecShare& x, int party) {
  BitVecShare r = x;
  for (auto& p : r.planes) {
    for (auto& w : p) w = rss::add_public(w, party, Gf2x64::one());
  }
  return r;
}

BitVecShare msb(const BitVecShare& x) {
  BitVecShare r(1, x.count);
  r.planes[0] = x.planes.back();
  return r;
}

BitVecShare and_gate(Session& s, const BitVecShare& a, const BitVecShare& b) {
  check_same_shape(a, b);
  auto z = rss::mul<Gf2x64>(s, concat(a), concat(b));
  s.stats().and_gates += a.width * a.count;
  return unconcat(a.width, a.count, z);
}

std::vector<uint64_t> open_values(Session& s, const BitVecShare& x) {
  auto v = rss::open<Gf2x64>(s, concat(x));
  std::vector<std::vector<uint64_t>> planes(x.width, std::vector<uint64_t>(x.words()));
  for (size_t b = 0; b < x.width; ++b) {
    for (size_t w = 0; w < x.words(); ++w) planes[b][w] = v[b * x.words() + w].v;
  }
  return unslice_words(planes, x.count);
}

BitVecShare rca(Session& s, const BitVecShare& x, const BitVecShare& y) {
  check_same_shape(x, y);
  const size_t w = x.width, W = x.words();
  BitVecShare z(w, x.count);
  if (w == 0) return z;
  std::vector<rss::TripleBatch<Gf2x64>> triples;
  if (w > 1) {
    std::vector<size_t> sizes(w - 1, W);
    triples = rss::split_triples(s, rss::triple_gen<Gf2x64>(s, (w - 1) * W), sizes);
  }
  ShareVec<Gf2x64> carry(W);  // c_{i-1}, zero into bit 0
  for (size_t i = 0; i < w; ++i) {
    const auto xc = plane_xor(x.planes[i], carry);
    z.planes[i] = plane_xor(xc, y.planes[i]);
    if (i + 1 == w) break;  // final carry dropped
    const auto yc = plane_xor(y.planes[i], carry);
    carry = plane_xor(rss::mul_beaver(s, xc, yc, triples[i]), carry);
    s.stats().and_gates += x.count;
  }
  return z;
}

BitVecShare a2b(Session& s, const ShareVec<RingEl64>& x) {
  const size_t n = x.size();
  const int i = s.party();
  std::vector<uint64_t> own(n), next(n), zero(n, 0);
  for (size_t k = 0; k < n; ++k) {
    own[k] = x[k].own.v;
    next[k] = x[k].next.v;
  }
  // Component j as a boolean sharing: party j holds (x_j, 0), party j - 1
  // holds (0, x_j), the third party holds (0, 0).
  std::array<BitVecShare, 3> comp;
  comp[i] = slice(64, own, zero);
  comp[(i + 1) % 3] = slice(64, zero, next);
  comp[(i + 2) % 3] = slice(64, zero, zero);
  return rca(s, rca(s, comp[0], comp[1]), comp[2]);
}

ShareVec<RingEl64> b2a(Session& s, const BitVecShare& x) {
  std::optional<std::vector<uint64_t>> r1, r2;
  auto draw = [&](crypto::CtrStream& st) {
    std::vector<uint64_t> v(x.count);
    for (auto& e : v) e = st.next_u64();
    return v;
  };
  // r1 from the seed of parties 0 and 1, r2 from that of parties 1 and 2.
  if (s.party() == 0) r1 = draw(s.prf_next());
  if (s.party() == 1) {
    r1 = draw(s.prf_prev());
    r2 = draw(s.prf_next());
  }
  if (s.party() == 2) r2 = draw(s.prf_prev());
  return b2a_masked(s, x, r1, r2);
}

ShareVec<RingEl64> b2a_masked(Session& s, const BitVecShare& x,
                              const std::optional<std::vector<uint64_t>>& r1,
                              const std::optional<std::vector<uint64_t>>& r2) {
  if (x.width != 64) throw std::invalid_argument("b2a expects width 64");
  const size_t n = x.count;
  const int p = s.party();
  const std::vector<uint64_t> zero(n, 0);
  // r1 is component 1 (held by parties 0 and 1), r2 is component 2 (held by
  // parties 1 and 2).
  BitVecShare b1 = p == 0 ? slice(64, zero, *r1) : p == 1 ? slice(64, *r1, zero) : slice(64, zero, zero);
  BitVecShare b2 = p == 1 ? slice(64, zero, *r2) : p == 2 ? slice(64, *r2, zero) : slice(64, zero, zero);
  BitVecShare r3 = rca(s, rca(s, x, b1), b2);

  auto c = rss::open_to<Gf2x64>(s, concat(r3), 0b101);
  std::vector<uint64_t> r3v;
  if (c) {
    std::vector<std::vector<uint64_t>> planes(64, std::vector<uint64_t>(r3.words()));
    for (size_t b = 0; b < 64; ++b) {
      for (size_t w = 0; w < r3.words(); ++w) planes[b][w] = (*c)[b * r3.words() + w].v;
    }
    r3v = unslice_words(planes, n);
  }
  ShareVec<RingEl64> out(n);
  for (size_t k = 0; k < n; ++k) {
    switch (p) {
      case 0: out[k] = {RingEl64{r3v[k]}, -RingEl64{(*r1)[k]}}; break;
      case 1: out[k] = {-RingEl64{(*r1)[k]}, -RingEl64{(*r2)[k]}}; break;
      default: out[k] = {-RingEl64{(*r2)[k]}, RingEl64{r3v[k]}}; break;
    }
  }
  return out;
}

ShareVec<RingEl64> bit_to_arith(Session& s, const BitVecShare& bit) {
  if (bit.width != 1) throw std::invalid_argument("bit_to_arith expects width 1");
  const size_t n = bit.count;
  std::vector<uint64_t> own(n), next(n);
  for (size_t k = 0; k < n; ++k) {
    own[k] = (bit.planes[0][k / 64].own.v >> (k % 64)) & 1;
    next[k] = (bit.planes[0][k / 64].next.v >> (k % 64)) & 1;
  }
  const int p = s.party();
  auto u = single_component(p, 0, own, next);
  auto v = single_component(p, 1, own, next);
  auto w = single_component(p, 2, own, next);
  auto t = rss::triple_gen<RingEl64>(s, 2 * n);
  const size_t half[2] = {n, n};
  auto tt = rss::split_triples(s, std::move(t), half);
  const RingEl64 two{2};
  auto x01 = (u + v) - rss::scale(rss::mul_beaver(s, u, v, tt[0]), two);
  return (x01 + w) - rss::scale(rss::mul_beaver(s, x01, w, tt[1]), two);
}

BitVecShare bytes_to_bits64(const ShareVec<Gf8>& bytes) {
  if (bytes.size() % 8 != 0) throw std::invalid_argument("byte count not a multiple of 8");
  const size_t n = bytes.size() / 8;
  std::vector<uint64_t> own(n, 0), next(n, 0);
  for (size_t k = 0; k < n; ++k) {
    for (size_t j = 0; j < 8; ++j) {
      own[k] |= uint64_t{bytes[8 * k + j].own.v} << (8 * j);
      next[k] |= uint64_t{bytes[8 * k + j].next.v} << (8 * j);
    }
  }
  return slice(64, own, next);
}

ShareVec<Gf8> bits64_to_bytes(const BitVecShare& x) {
  if (x.width != 64) throw std::invalid_argument("bits64_to_bytes expects width 64");
  auto own = unslice_own(x);
  auto next = unslice_next(x);
  ShareVec<Gf8> out(8 * x.count);
  for (size_t k = 0; k < x.count; ++k) {
    for (size_t j = 0; j < 8; ++j) {
      out[8 * k + j] = {Gf8{static_cast<uint8_t>(own[k] >> (8 * j))},
                        Gf8{static_cast<uint8_t>(next[k] >> (8 * j))}};
    }
  }
  return out;
}

}  // namespace mpcpipe::convert
