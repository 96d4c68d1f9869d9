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

#include "mpcpipe/algebra/gf.h"

namespace mpcpipe {

// Element a*X + b of GF(2^64)[X] / (X^2 + beta*X + gamma).
struct TowerRep {
  Gf64 hi;  // a
  Gf64 lo;  // b

  constexpr auto operator<=>(const TowerRep&) const = default;
  constexpr TowerRep operator+(TowerRep o) const { return {hi + o.hi, lo + o.lo}; }
};

inline constexpr Gf64 kTowerBeta{1};
inline constexpr Gf64 kTowerGamma{uint64_t{1} << 61};

// (aX + b)(cX + d) = (ad + bc + beta*ac) X + (bd + gamma*ac)
TowerRep tower_mul(TowerRep u, TowerRep v);

// Field isomorphism between the GCM field and the quadratic extension of
// GF(2^64) above. Built once on first use, read-only afterwards.
//
// Construction: a root theta of the GF(2^64) modulus is located inside the
// subfield {y : y^(2^64) = y} of GF(2^128) by trace splitting; this fixes the
// embedding psi: GF(2^64) -> GF(2^128). A root lambda of X^2 + X + psi(gamma)
// is found by solving the GF(2)-linear system v^2 + v = psi(gamma). The basis
// {psi(x^i)} U {lambda * psi(x^i)} then defines phi^{-1}(a, b) = lambda*psi(a) +
// psi(b), and phi is its inverse bit matrix. Every step is deterministic, so
// all parties obtain the same map.
class TowerIsomorphism {
 public:
  static const TowerIsomorphism& instance();

  TowerRep phi(Gf128 u) const;
  Gf128 phi_inv(TowerRep t) const;
  Gf128 embed(Gf64 a) const;
  Gf128 lambda() const { return lambda_; }

 private:
  TowerIsomorphism();

  using ByteTable = std::array<std::array<Gf128, 256>, 16>;

  static ByteTable tabulate(const std::array<Gf128, 128>& columns);
  static Gf128 apply(const ByteTable& table, Gf128 x);

  Gf128 lambda_;
  ByteTable psi_;      // GF(2^64) -> GF(2^128), only the low 8 byte slots used
  ByteTable forward_;  // phi, output packed as (lo = b, hi = a)
  ByteTable inverse_;  // phi^{-1}
};

inline TowerRep phi(Gf128 u) { return TowerIsomorphism::instance().phi(u); }
inline Gf128 phi_inv(TowerRep t) { return TowerIsomorphism::instance().phi_inv(t); }

}  // namespace mpcpipe
