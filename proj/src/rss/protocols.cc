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

#include "mpcpipe/rss/protocols.h"

#include <chrono>

#include "mpcpipe/algebra/tower.h"
#include "mpcpipe/common/error.h"

namespace mpcpipe::rss {

namespace {

template <ShareAlgebra T>
Bytes encode(std::span<const T> v) {
  Bytes out;
  write_elems<T>(v, out);
  return out;
}

template <ShareAlgebra T>
std::vector<T> components(const ShareVec<T>& x, bool own) {
  std::vector<T> v(x.size());
  for (size_t i = 0; i < x.size(); ++i) v[i] = own ? x[i].own : x[i].next;
  return v;
}

// Local cross terms of a replicated product: x_i y_i + x_i y_{i+1} + x_{i+1} y_i.
template <ShareAlgebra T>
void add_cross_terms(const ShareVec<T>& x, const ShareVec<T>& y, std::vector<T>& z, size_t off) {
  for (size_t i = 0; i < x.size(); ++i) {
    z[off + i] += x[i].own * y[i].own + x[i].own * y[i].next + x[i].next * y[i].own;
  }
}

template <ShareAlgebra T>
std::vector<T> draw_public(crypto::CtrStream& coin, size_t n) {
  std::vector<uint8_t> buf(n * T::kBytes);
  coin.fill(buf);
  return read_elems<T>(buf, n);
}

}  // namespace

template <ShareAlgebra T>
ShareVec<T> random_shares(Session& s, size_t n) {
  auto own = s.draw<T>(s.prf_prev(), n);
  auto next = s.draw<T>(s.prf_next(), n);
  ShareVec<T> r(n);
  for (size_t i = 0; i < n; ++i) r[i] = {own[i], next[i]};
  return r;
}

template <ShareAlgebra T>
std::vector<T> zero_summands(Session& s, size_t n) {
  auto fwd = s.draw<T>(s.prf_next(), n);
  auto back = s.draw<T>(s.prf_prev(), n);
  for (size_t i = 0; i < n; ++i) fwd[i] -= back[i];
  return fwd;
}

template <ShareAlgebra T>
ShareVec<T> reshare(Session& s, std::vector<T> z) {
  const size_t n = z.size();
  Bytes msg = encode<T>(z);
  s.tamper("reshare", msg);
  std::vector<T> own = read_elems<T>(msg, n);
  s.send(Peer::kPrev, MsgTag::kReshare, std::move(msg));
  auto next = read_elems<T>(s.recv(Peer::kNext, MsgTag::kReshare, n * T::kBytes), n);
  s.stats().rounds++;
  ShareVec<T> r(n);
  for (size_t i = 0; i < n; ++i) r[i] = {own[i], next[i]};
  return r;
}

template <ShareAlgebra T>
std::optional<std::vector<T>> open_to(Session& s, const ShareVec<T>& x, uint8_t recipients) {
  const size_t n = x.size();
  const bool to_next = recipients & (1u << s.next_party());
  const bool to_prev = recipients & (1u << s.prev_party());
  const bool to_me = recipients & (1u << s.party());
  // The party before a recipient holds the missing component as own, the
  // party after it holds the same component as next.
  if (to_next) {
    Bytes msg = encode<T>(components(x, true));
    s.tamper("open.own", msg);
    s.send(Peer::kNext, MsgTag::kOpen, std::move(msg));
  }
  if (s.mal() && to_prev) {
    Bytes msg = encode<T>(components(x, false));
    s.tamper("open.next", msg);
    s.send(Peer::kPrev, MsgTag::kOpen, std::move(msg));
  }
  s.stats().rounds++;
  if (!to_me) return std::nullopt;
  Bytes missing = s.recv(Peer::kPrev, MsgTag::kOpen, n * T::kBytes);
  if (s.mal()) {
    Bytes copy = s.recv(Peer::kNext, MsgTag::kOpen, n * T::kBytes);
    if (copy != missing) s.fail(abort_code::kOpenInconsistent);
  }
  auto m = read_elems<T>(missing, n);
  std::vector<T> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = x[i].own + x[i].next + m[i];
  s.stats().opened_elements += n;
  return v;
}

template <ShareAlgebra T>
std::vector<T> open(Session& s, const ShareVec<T>& x) {
  auto v = *open_to(s, x, kAllParties);
  s.absorb_transcript(encode<T>(v));
  return v;
}

template <ShareAlgebra T>
ShareVec<T> input(Session& s, int owner, std::span<const T> values, size_t n) {
  ShareVec<T> r(n);
  if (s.party() == owner) {
    if (values.size() != n) throw std::invalid_argument("input: value count mismatch");
    auto c_me = s.draw<T>(s.prf_prev(), n);
    auto c_next = s.draw<T>(s.prf_next(), n);
    std::vector<T> c_prev(n);
    for (size_t i = 0; i < n; ++i) {
      c_prev[i] = values[i] - c_me[i] - c_next[i];
      r[i] = {c_me[i], c_next[i]};
    }
    Bytes msg = encode<T>(c_prev);
    s.send(Peer::kNext, MsgTag::kInput, msg);
    s.send(Peer::kPrev, MsgTag::kInput, std::move(msg));
    s.stats().rounds++;
    return r;
  }
  Bytes got;
  if (s.prev_party() == owner) {
    auto mine = s.draw<T>(s.prf_prev(), n);
    got = s.recv(Peer::kPrev, MsgTag::kInput, n * T::kBytes);
    auto last = read_elems<T>(got, n);
    for (size_t i = 0; i < n; ++i) r[i] = {mine[i], last[i]};
  } else {
    auto owners = s.draw<T>(s.prf_next(), n);
    got = s.recv(Peer::kNext, MsgTag::kInput, n * T::kBytes);
    auto last = read_elems<T>(got, n);
    for (size_t i = 0; i < n; ++i) r[i] = {last[i], owners[i]};
  }
  s.stats().rounds++;
  if (s.mal()) {
    // The two receivers got the same component; compare digests.
    auto d = crypto::sha256(got);
    Bytes mine(d.begin(), d.end());
    Peer other = s.prev_party() == owner ? Peer::kNext : Peer::kPrev;
    s.send(other, MsgTag::kDigest, mine);
    if (s.recv(other, MsgTag::kDigest, mine.size()) != mine) s.fail(abort_code::kInputInconsistent);
    s.stats().rounds++;
  }
  return r;
}

crypto::CtrStream joint_coin(Session& s) {
  auto v = open(s, random_shares<Gf128>(s, 1));
  std::array<uint8_t, 16> seed{};
  v[0].write(seed.data());
  return crypto::CtrStream(seed);
}

template <ShareAlgebra T>
TripleBatch<T> triple_gen(Session& s, size_t n) {
  auto t0 = std::chrono::steady_clock::now();
  TripleBatch<T> t;
  t.id = s.register_triples();
  if (n == 0) return t;
  const size_t reps = s.mal() ? sacrifice_reps<T>() : 0;

  t.a = random_shares<T>(s, n);
  t.b = random_shares<T>(s, n);
  std::vector<ShareVec<T>> a2(reps);
  for (auto& v : a2) v = random_shares<T>(s, n);

  std::vector<T> z = zero_summands<T>(s, n * (1 + reps));
  add_cross_terms(t.a, t.b, z, 0);
  for (size_t r = 0; r < reps; ++r) add_cross_terms(a2[r], t.b, z, n * (1 + r));
  ShareVec<T> all = reshare<T>(s, std::move(z));
  t.c.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));

  if (reps > 0) {
    // (a, b, c) is checked against (a'_r, b, c'_r): with rho = r a - a',
    // r c - c' - rho b vanishes for correct triples.
    auto coin = joint_coin(s);
    auto chal = draw_public<T>(coin, n * reps);
    ShareVec<T> rho(n * reps);
    for (size_t r = 0; r < reps; ++r) {
      for (size_t i = 0; i < n; ++i) rho[r * n + i] = t.a[i] * chal[r * n + i] - a2[r][i];
    }
    auto rho_open = open(s, rho);
    ShareVec<T> zeta(n * reps);
    for (size_t r = 0; r < reps; ++r) {
      for (size_t i = 0; i < n; ++i) {
        const size_t k = r * n + i;
        zeta[k] = t.c[i] * chal[k] - all[n * (1 + r) + i] - t.b[i] * rho_open[k];
      }
    }
    for (const T& v : open(s, zeta)) {
      if (!(v == T::zero())) s.fail(abort_code::kPreprocessingCorrupt);
    }
  }
  s.stats().triples_generated += n;
  s.stats().preprocessing_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

template <ShareAlgebra T>
ShareVec<T> mul_beaver(Session& s, const ShareVec<T>& x, const ShareVec<T>& y, TripleBatch<T>& t) {
  const size_t n = x.size();
  if (y.size() != n || t.size() != n) throw std::invalid_argument("mul_beaver: size mismatch");
  s.consume_triples(t.id, n);
  ShareVec<T> de(2 * n);
  for (size_t i = 0; i < n; ++i) {
    de[i] = x[i] - t.a[i];
    de[n + i] = y[i] - t.b[i];
  }
  auto o = open(s, de);
  ShareVec<T> z(n);
  for (size_t i = 0; i < n; ++i) {
    const T d = o[i], e = o[n + i];
    z[i] = add_public(t.c[i] + t.b[i] * d + t.a[i] * e, s.party(), d * e);
  }
  return z;
}

template <ShareAlgebra T>
ShareVec<T> mul(Session& s, const ShareVec<T>& x, const ShareVec<T>& y) {
  auto t = triple_gen<T>(s, x.size());
  return mul_beaver(s, x, y, t);
}

void verify_gf128_products(Session& s, std::span<const Gf128Product> batch) {
  const size_t n = batch.size();
  if (n == 0) return;
  const auto& iso = TowerIsomorphism::instance();
  // phi is GF(2)-linear, so it maps each replicated component separately.
  auto split = [&](const Share<Gf128>& x, Share<Gf64>& hi, Share<Gf64>& lo) {
    TowerRep o = iso.phi(x.own), q = iso.phi(x.next);
    hi = {o.hi, q.hi};
    lo = {o.lo, q.lo};
  };
  ShareVec<Gf64> a(n), b(n), c(n), d(n), e(n), f(n);
  for (size_t j = 0; j < n; ++j) {
    split(batch[j].u, a[j], b[j]);
    split(batch[j].v, c[j], d[j]);
    split(batch[j].w, e[j], f[j]);
  }
  // P = (a+b)(c+d), Q = bd, R = ac in one multiplication batch.
  ShareVec<Gf64> lhs(3 * n), rhs(3 * n);
  for (size_t j = 0; j < n; ++j) {
    lhs[j] = a[j] + b[j];
    rhs[j] = c[j] + d[j];
    lhs[n + j] = b[j];
    rhs[n + j] = d[j];
    lhs[2 * n + j] = a[j];
    rhs[2 * n + j] = c[j];
  }
  auto prod = mul<Gf64>(s, lhs, rhs);

  // ad + bc + beta ac = P + Q + (1 + beta) R and bd + gamma ac = Q + gamma R.
  const Gf64 one_plus_beta = Gf64::one() + kTowerBeta;
  auto coin = joint_coin(s);
  auto chal = draw_public<Gf64>(coin, 2 * n);
  ShareVec<Gf64> sums(2);
  for (size_t j = 0; j < n; ++j) {
    const auto& P = prod[j];
    const auto& Q = prod[n + j];
    const auto& R = prod[2 * n + j];
    sums[0] += (P + Q + R * one_plus_beta - e[j]) * chal[j];
    sums[1] += (Q + R * kTowerGamma - f[j]) * chal[n + j];
  }
  auto opened = open(s, sums);
  if (!(opened[0] == Gf64::zero()) || !(opened[1] == Gf64::zero())) {
    s.fail(abort_code::kMulVerifyFailed);
  }
  s.stats().gf128_products_verified += n;
}

void verify_pending_gf128(Session& s) {
  std::vector<Gf128Product> batch;
  batch.swap(s.pending_gf128());
  verify_gf128_products(s, batch);
}

#define MPCPIPE_INSTANTIATE(T)                                                                \
  template ShareVec<T> random_shares<T>(Session&, size_t);                                    \
  template std::vector<T> zero_summands<T>(Session&, size_t);                                 \
  template ShareVec<T> reshare<T>(Session&, std::vector<T>);                                  \
  template std::optional<std::vector<T>> open_to<T>(Session&, const ShareVec<T>&, uint8_t);   \
  template std::vector<T> open<T>(Session&, const ShareVec<T>&);                              \
  template ShareVec<T> input<T>(Session&, int, std::span<const T>, size_t);                   \
  template TripleBatch<T> triple_gen<T>(Session&, size_t);                                    \
  template ShareVec<T> mul_beaver<T>(Session&, const ShareVec<T>&, const ShareVec<T>&,        \
                                     TripleBatch<T>&);                                        \
  template ShareVec<T> mul<T>(Session&, const ShareVec<T>&, const ShareVec<T>&);

MPCPIPE_INSTANTIATE(RingEl64)
MPCPIPE_INSTANTIATE(Gf8)
MPCPIPE_INSTANTIATE(Gf64)
MPCPIPE_INSTANTIATE(Gf128)
MPCPIPE_INSTANTIATE(Gf2x64)

}  // namespace mpcpipe::rss
