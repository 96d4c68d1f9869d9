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
#include <cstddef>
#include <span>
#include <vector>

#include "mpcpipe/algebra/gf.h"
#include "mpcpipe/algebra/ring.h"

namespace mpcpipe::rss {

// One party's view of a replicated sharing x = x_0 + x_1 + x_2. Party i
// (0-based) holds own = x_i and next = x_{i+1 mod 3}.
template <ShareAlgebra T>
struct Share {
  T own{};
  T next{};

  Share operator+(const Share& o) const { return {own + o.own, next + o.next}; }
  Share operator-(const Share& o) const { return {own - o.own, next - o.next}; }
  Share operator-() const { return {-own, -next}; }
  Share operator*(T c) const { return {own * c, next * c}; }
  Share& operator+=(const Share& o) { own += o.own; next += o.next; return *this; }
  Share& operator-=(const Share& o) { own -= o.own; next -= o.next; return *this; }
  bool operator==(const Share&) const = default;
};

template <ShareAlgebra T>
using ShareVec = std::vector<Share<T>>;

// Adds a public constant to component 0, held by party 0 (own) and party 2
// (next).
template <ShareAlgebra T>
Share<T> add_public(const Share<T>& s, int party, T c) {
  Share<T> r = s;
  if (party == 0) r.own += c;
  if (party == 2) r.next += c;
  return r;
}

template <ShareAlgebra T>
std::array<Share<T>, 3> from_components(const std::array<T, 3>& x) {
  return {Share<T>{x[0], x[1]}, Share<T>{x[1], x[2]}, Share<T>{x[2], x[0]}};
}

// Dealer-side sharing: components (r1, r2, secret - r1 - r2).
template <ShareAlgebra T>
std::array<Share<T>, 3> share_secret(T secret, T r1, T r2) {
  return from_components<T>({r1, r2, secret - r1 - r2});
}

template <ShareAlgebra T>
T reconstruct(const std::array<Share<T>, 3>& s) {
  return s[0].own + s[1].own + s[2].own;
}

// Any two distinct parties jointly hold all three components.
template <ShareAlgebra T>
T reconstruct_pair(int i, const Share<T>& si, int j, const Share<T>& sj) {
  std::array<T, 3> x{};
  x[i] = si.own;
  x[(i + 1) % 3] = si.next;
  x[j] = sj.own;
  x[(j + 1) % 3] = sj.next;
  return x[0] + x[1] + x[2];
}

// The layout invariant of every honest sharing.
template <ShareAlgebra T>
bool layout_consistent(const std::array<Share<T>, 3>& s) {
  return s[0].next == s[1].own && s[1].next == s[2].own && s[2].next == s[0].own;
}

template <ShareAlgebra T>
ShareVec<T> operator+(const ShareVec<T>& a, const ShareVec<T>& b) {
  ShareVec<T> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

template <ShareAlgebra T>
ShareVec<T> operator-(const ShareVec<T>& a, const ShareVec<T>& b) {
  ShareVec<T> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <ShareAlgebra T>
ShareVec<T> scale(const ShareVec<T>& a, T c) {
  ShareVec<T> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
  return r;
}

template <ShareAlgebra T>
ShareVec<T> add_public(const ShareVec<T>& a, int party, std::span<const T> c) {
  ShareVec<T> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = add_public(a[i], party, c[i]);
  return r;
}

// Element (de)serialization for the wire: fixed width, little-endian.
template <ShareAlgebra T>
void write_elems(std::span<const T> v, std::vector<uint8_t>& out) {
  size_t off = out.size();
  out.resize(off + v.size() * T::kBytes);
  for (size_t i = 0; i < v.size(); ++i) v[i].write(out.data() + off + i * T::kBytes);
}

template <ShareAlgebra T>
std::vector<T> read_elems(std::span<const uint8_t> in, size_t n) {
  std::vector<T> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = T::read(in.data() + i * T::kBytes);
  return v;
}

}  // namespace mpcpipe::rss
