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

#include "mpcpipe/rss/matrix.h"

#include <chrono>
#include <stdexcept>

#include "mpcpipe/common/error.h"

namespace mpcpipe::rss {

namespace {

struct Split {
  std::vector<uint64_t> own, next;
};

Split split(const ShareMatrix& x) {
  Split s{std::vector<uint64_t>(x.v.size()), std::vector<uint64_t>(x.v.size())};
  for (size_t i = 0; i < x.v.size(); ++i) {
    s.own[i] = x.v[i].own.v;
    s.next[i] = x.v[i].next.v;
  }
  return s;
}

ShareMatrix join(size_t r, size_t c, const std::vector<uint64_t>& own,
                 const std::vector<uint64_t>& next) {
  ShareMatrix m(r, c);
  for (size_t i = 0; i < m.v.size(); ++i) m.v[i] = {RingEl64{own[i]}, RingEl64{next[i]}};
  return m;
}

void add_into(std::vector<uint64_t>& acc, const std::vector<uint64_t>& x) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

std::vector<uint64_t> plain(const std::vector<RingEl64>& v) {
  std::vector<uint64_t> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i].v;
  return r;
}

// x_i y_i + x_i y_{i+1} + x_{i+1} y_i = x_i (y_i + y_{i+1}) + x_{i+1} y_i.
std::vector<uint64_t> cross_terms(const Split& x, const Split& y, size_t m, size_t k, size_t n) {
  std::vector<uint64_t> ysum(y.own.size());
  for (size_t i = 0; i < ysum.size(); ++i) ysum[i] = y.own[i] + y.next[i];
  auto z = ring_matmul(x.own, ysum, m, k, n);
  add_into(z, ring_matmul(x.next, y.own, m, k, n));
  return z;
}

// Public matrix times a shared one, either side.
ShareMatrix pub_times(const std::vector<uint64_t>& p, const Split& y, size_t m, size_t k, size_t n) {
  return join(m, n, ring_matmul(p, y.own, m, k, n), ring_matmul(p, y.next, m, k, n));
}
ShareMatrix times_pub(const Split& x, const std::vector<uint64_t>& p, size_t m, size_t k, size_t n) {
  return join(m, n, ring_matmul(x.own, p, m, k, n), ring_matmul(x.next, p, m, k, n));
}

}  // namespace

ShareMatrix::ShareMatrix(size_t r, size_t c, ShareVec<RingEl64> data)
    : rows(r), cols(c), v(std::move(data)) {
  if (v.size() != r * c) throw std::invalid_argument("ShareMatrix: size mismatch");
}

std::vector<uint64_t> ring_matmul(const std::vector<uint64_t>& x, const std::vector<uint64_t>& y,
                                  size_t m, size_t k, size_t n) {
  std::vector<uint64_t> z(m * n, 0);
  for (size_t i = 0; i < m; ++i) {
    uint64_t* zr = z.data() + i * n;
    for (size_t l = 0; l < k; ++l) {
      const uint64_t a = x[i * k + l];
      if (a == 0) continue;
      const uint64_t* yr = y.data() + l * n;
      for (size_t j = 0; j < n; ++j) zr[j] += a * yr[j];
    }
  }
  return z;
}

MatTriple mat_triple_gen(Session& s, size_t m, size_t k, size_t n) {
  auto t0 = std::chrono::steady_clock::now();
  MatTriple t;
  t.id = s.register_triples();
  const size_t reps = s.mal() ? sacrifice_reps<RingEl64>() : 0;

  t.a = ShareMatrix(m, k, random_shares<RingEl64>(s, m * k));
  t.b = ShareMatrix(k, n, random_shares<RingEl64>(s, k * n));
  // The sacrificial left factors are stacked under A so that every cross term
  // comes out of one product.
  ShareMatrix a_all(m * (1 + reps), k);
  std::copy(t.a.v.begin(), t.a.v.end(), a_all.v.begin());
  auto extra = random_shares<RingEl64>(s, m * k * reps);
  std::copy(extra.begin(), extra.end(), a_all.v.begin() + static_cast<std::ptrdiff_t>(m * k));

  Split bs = split(t.b);
  auto z = cross_terms(split(a_all), bs, a_all.rows, k, n);
  auto zero = zero_summands<RingEl64>(s, z.size());
  std::vector<RingEl64> zr(z.size());
  for (size_t i = 0; i < z.size(); ++i) zr[i] = RingEl64{z[i]} + zero[i];
  ShareVec<RingEl64> c_all = reshare<RingEl64>(s, std::move(zr));
  t.c = ShareMatrix(m, n, ShareVec<RingEl64>(c_all.begin(), c_all.begin() + static_cast<std::ptrdiff_t>(m * n)));

  if (reps > 0) {
    auto coin = joint_coin(s);
    std::vector<RingEl64> chal(reps);
    for (auto& c : chal) c = RingEl64{coin.next_u64()};
    ShareVec<RingEl64> rho(m * k * reps);
    for (size_t r = 0; r < reps; ++r) {
      for (size_t i = 0; i < m * k; ++i) rho[r * m * k + i] = t.a.v[i] * chal[r] - extra[r * m * k + i];
    }
    auto rho_open = plain(open(s, rho));
    // rho_r B for all r at once: stacked (reps*m) x k times k x n.
    ShareMatrix rho_b = pub_times(rho_open, bs, reps * m, k, n);
    ShareVec<RingEl64> zeta(m * n * reps);
    for (size_t r = 0; r < reps; ++r) {
      for (size_t i = 0; i < m * n; ++i) {
        const size_t q = r * m * n + i;
        zeta[q] = t.c.v[i] * chal[r] - c_all[m * n + q] - rho_b.v[q];
      }
    }
    for (const RingEl64& v : open(s, zeta)) {
      if (v.v != 0) s.fail(abort_code::kPreprocessingCorrupt);
    }
  }
  s.stats().triples_generated += 1;
  s.stats().preprocessing_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

ShareMatrix matmul_beaver(Session& s, const ShareMatrix& x, const ShareMatrix& y, MatTriple& t) {
  const size_t m = x.rows, k = x.cols, n = y.cols;
  if (y.rows != k || t.a.rows != m || t.a.cols != k || t.b.cols != n) {
    throw std::invalid_argument("matmul_beaver: dimension mismatch");
  }
  s.consume_triples(t.id, 1);
  ShareVec<RingEl64> de(m * k + k * n);
  for (size_t i = 0; i < m * k; ++i) de[i] = x.v[i] - t.a.v[i];
  for (size_t i = 0; i < k * n; ++i) de[m * k + i] = y.v[i] - t.b.v[i];
  auto o = plain(open(s, de));
  std::vector<uint64_t> d(o.begin(), o.begin() + static_cast<std::ptrdiff_t>(m * k));
  std::vector<uint64_t> e(o.begin() + static_cast<std::ptrdiff_t>(m * k), o.end());

  // Z = C + D B + A E + D E.
  ShareMatrix z = t.c;
  auto db = pub_times(d, split(t.b), m, k, n);
  auto ae = times_pub(split(t.a), e, m, k, n);
  auto de_pub = ring_matmul(d, e, m, k, n);
  for (size_t i = 0; i < m * n; ++i) {
    z.v[i] = add_public(z.v[i] + db.v[i] + ae.v[i], s.party(), RingEl64{de_pub[i]});
  }
  return z;
}

ShareMatrix matmul(Session& s, const ShareMatrix& x, const ShareMatrix& y) {
  auto t = mat_triple_gen(s, x.rows, x.cols, y.cols);
  return matmul_beaver(s, x, y, t);
}

}  // namespace mpcpipe::rss
