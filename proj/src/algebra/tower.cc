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

#include "mpcpipe/algebra/tower.h"

#include <bitset>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace mpcpipe {
namespace {

using Poly = std::vector<Gf128>;  // coefficients, lowest degree first

void trim(Poly& p) {
  while (!p.empty() && p.back().is_zero()) p.pop_back();
}

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

// Remainder of a modulo f, f monic.
Poly poly_mod(Poly a, const Poly& f) {
  const int df = degree(f);
  trim(a);
  for (int i = degree(a); i >= df; --i) {
    Gf128 c = a[i];
    if (c.is_zero()) continue;
    for (int j = 0; j <= df; ++j) a[i - df + j] -= c * f[j];
  }
  if (static_cast<int>(a.size()) > df) a.resize(df);
  trim(a);
  return a;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

Poly make_monic(Poly p) {
  trim(p);
  Gf128 inv = p.back().inverse();
  for (auto& c : p) c = c * inv;
  return p;
}

Poly poly_gcd(Poly a, Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, make_monic(b));
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(a);
}

// Exact quotient a / f for monic f.
Poly poly_div(Poly a, const Poly& f) {
  const int df = degree(f);
  trim(a);
  Poly q(std::max(0, degree(a) - df + 1));
  for (int i = degree(a); i >= df; --i) {
    Gf128 c = a[i];
    q[i - df] = c;
    if (c.is_zero()) continue;
    for (int j = 0; j <= df; ++j) a[i - df + j] -= c * f[j];
  }
  return q;
}

Gf128 frobenius64(Gf128 u) {
  for (int i = 0; i < 64; ++i) u = u.square();
  return u;
}

// Gauss-Jordan over GF(2). Returns the inverse of the matrix whose columns
// are `cols`, or nullopt when singular.
std::optional<std::array<Gf128, 128>> invert(const std::array<Gf128, 128>& cols) {
  std::array<std::bitset<256>, 128> rows;
  for (int r = 0; r < 128; ++r) {
    for (int c = 0; c < 128; ++c) rows[r][c] = cols[c].bit(r);
    rows[r][128 + r] = true;
  }
  for (int c = 0; c < 128; ++c) {
    int pivot = -1;
    for (int r = c; r < 128; ++r) {
      if (rows[r][c]) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) return std::nullopt;
    std::swap(rows[c], rows[pivot]);
    for (int r = 0; r < 128; ++r) {
      if (r != c && rows[r][c]) rows[r] ^= rows[c];
    }
  }
  std::array<Gf128, 128> inv{};
  for (int c = 0; c < 128; ++c) {
    for (int r = 0; r < 128; ++r) {
      if (rows[r][128 + c]) inv[c] += Gf128::monomial(r);
    }
  }
  return inv;
}

// One solution of A v = target over GF(2), or nullopt if inconsistent.
std::optional<Gf128> solve(const std::array<Gf128, 128>& cols, Gf128 target) {
  std::array<std::bitset<129>, 128> rows;
  for (int r = 0; r < 128; ++r) {
    for (int c = 0; c < 128; ++c) rows[r][c] = cols[c].bit(r);
    rows[r][128] = target.bit(r);
  }
  std::array<int, 128> pivot_col{};
  int rank = 0;
  for (int c = 0; c < 128 && rank < 128; ++c) {
    int pivot = -1;
    for (int r = rank; r < 128; ++r) {
      if (rows[r][c]) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < 128; ++r) {
      if (r != rank && rows[r][c]) rows[r] ^= rows[rank];
    }
    pivot_col[rank++] = c;
  }
  for (int r = rank; r < 128; ++r) {
    if (rows[r][128]) return std::nullopt;
  }
  Gf128 v;
  for (int r = 0; r < rank; ++r) {
    if (rows[r][128]) v += Gf128::monomial(pivot_col[r]);
  }
  return v;
}

Gf128 find_modulus_root() {
  // x^64 + x^4 + x^3 + x + 1
  Poly f(65);
  for (int e : {0, 1, 3, 4, 64}) f[e] = Gf128::one();
  const Poly modulus = f;

  std::mt19937_64 rng(0x6d6f64756c7573ULL);
  int attempts = 0;
  while (degree(f) > 1) {
    if (++attempts > 1000) throw std::logic_error("tower: root splitting did not converge");
    Gf128 u{rng(), rng()};
    Gf128 delta = frobenius64(u) * u;  // norm to the subfield
    if (delta.is_zero()) continue;
    Poly t = poly_mod(Poly{Gf128::zero(), delta}, f);
    Poly acc = t;
    acc.resize(std::max<size_t>(acc.size(), static_cast<size_t>(degree(f))));
    for (int j = 1; j < 64; ++j) {
      t = poly_mod(poly_mul(t, t), f);
      if (acc.size() < t.size()) acc.resize(t.size());
      for (size_t k = 0; k < t.size(); ++k) acc[k] += t[k];
    }
    trim(acc);
    if (acc.empty()) continue;
    Poly g = poly_gcd(f, acc);
    int dg = degree(g);
    if (dg <= 0 || dg >= degree(f)) continue;
    f = (2 * dg <= degree(f)) ? g : make_monic(poly_div(f, g));
  }
  Gf128 theta = f[0];  // f = x + theta in characteristic 2

  Gf128 value, power = Gf128::one();
  for (const auto& c : modulus) {
    if (!c.is_zero()) value += power;
    power = power * theta;
  }
  if (!value.is_zero()) throw std::logic_error("tower: modulus root check failed");
  return theta;
}

}  // namespace

TowerRep tower_mul(TowerRep u, TowerRep v) {
  const Gf64 ac = u.hi * v.hi;
  return {u.hi * v.lo + u.lo * v.hi + kTowerBeta * ac, u.lo * v.lo + kTowerGamma * ac};
}

const TowerIsomorphism& TowerIsomorphism::instance() {
  static const TowerIsomorphism iso;
  return iso;
}

TowerIsomorphism::ByteTable TowerIsomorphism::tabulate(const std::array<Gf128, 128>& columns) {
  ByteTable t{};
  for (int byte = 0; byte < 16; ++byte) {
    for (int value = 0; value < 256; ++value) {
      Gf128 acc;
      for (int bit = 0; bit < 8; ++bit) {
        if (value & (1 << bit)) acc += columns[8 * byte + bit];
      }
      t[byte][value] = acc;
    }
  }
  return t;
}

Gf128 TowerIsomorphism::apply(const ByteTable& table, Gf128 x) {
  Gf128 acc;
  for (int byte = 0; byte < 8; ++byte) {
    acc += table[byte][(x.lo >> (8 * byte)) & 0xff];
    acc += table[8 + byte][(x.hi >> (8 * byte)) & 0xff];
  }
  return acc;
}

TowerIsomorphism::TowerIsomorphism() {
  const Gf128 theta = find_modulus_root();

  std::array<Gf128, 128> psi_cols{};
  Gf128 power = Gf128::one();
  for (int i = 0; i < 64; ++i) {
    psi_cols[i] = power;
    power = power * theta;
  }
  psi_ = tabulate(psi_cols);

  // v -> v^2 + v is GF(2)-linear.
  std::array<Gf128, 128> as_cols{};
  for (int i = 0; i < 128; ++i) {
    Gf128 m = Gf128::monomial(i);
    as_cols[i] = m.square() + m;
  }
  const Gf128 gamma = embed(kTowerGamma);
  auto root = solve(as_cols, gamma);
  if (!root) throw std::logic_error("tower: X^2 + X + gamma has no root in GF(2^128)");
  lambda_ = *root;
  if (!(lambda_.square() + embed(kTowerBeta) * lambda_ + gamma).is_zero()) {
    throw std::logic_error("tower: lambda check failed");
  }

  std::array<Gf128, 128> basis{};
  for (int i = 0; i < 64; ++i) {
    basis[i] = psi_cols[i];
    basis[64 + i] = lambda_ * psi_cols[i];
  }
  auto inv = invert(basis);
  if (!inv) throw std::logic_error("tower: basis is singular");
  inverse_ = tabulate(basis);
  forward_ = tabulate(*inv);
}

Gf128 TowerIsomorphism::embed(Gf64 a) const { return apply(psi_, Gf128{a.v, 0}); }

TowerRep TowerIsomorphism::phi(Gf128 u) const {
  Gf128 packed = apply(forward_, u);
  return TowerRep{Gf64{packed.hi}, Gf64{packed.lo}};
}

Gf128 TowerIsomorphism::phi_inv(TowerRep t) const {
  return apply(inverse_, Gf128{t.lo.v, t.hi.v});
}

}  // namespace mpcpipe
