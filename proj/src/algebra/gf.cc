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

#include "mpcpipe/algebra/gf.h"

#include <immintrin.h>

#include "mpcpipe/common/bytes.h"

namespace mpcpipe {
namespace {

struct Gf8Tables {
  std::array<uint8_t, 512> exp{};
  std::array<uint8_t, 256> log{};
};

constexpr uint8_t xtime(uint8_t a) {
  return static_cast<uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1b : 0));
}

// 0x03 generates the multiplicative group of the AES field.
constexpr Gf8Tables make_gf8_tables() {
  Gf8Tables t{};
  uint8_t x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[i] = x;
    t.exp[i + 255] = x;
    t.log[x] = static_cast<uint8_t>(i);
    x = static_cast<uint8_t>(x ^ xtime(x));
  }
  t.exp[510] = t.exp[0];
  return t;
}

constexpr Gf8Tables kGf8 = make_gf8_tables();

void clmul64_portable(uint64_t a, uint64_t b, uint64_t& lo, uint64_t& hi) {
  uint64_t l = 0, h = 0;
  for (int i = 0; i < 64; ++i) {
    if ((b >> i) & 1) {
      l ^= a << i;
      if (i != 0) h ^= a >> (64 - i);
    }
  }
  lo = l;
  hi = h;
}

__attribute__((target("pclmul,sse2"))) void clmul64_hw(uint64_t a, uint64_t b, uint64_t& lo,
                                                          uint64_t& hi) {
  __m128i va = _mm_set_epi64x(0, static_cast<long long>(a));
  __m128i vb = _mm_set_epi64x(0, static_cast<long long>(b));
  __m128i r = _mm_clmulepi64_si128(va, vb, 0x00);
  lo = static_cast<uint64_t>(_mm_cvtsi128_si64(r));
  hi = static_cast<uint64_t>(_mm_cvtsi128_si64(_mm_srli_si128(r, 8)));
}

using ClmulFn = void (*)(uint64_t, uint64_t, uint64_t&, uint64_t&);

ClmulFn pick_clmul() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("pclmul") ? clmul64_hw : clmul64_portable;
}

const ClmulFn kClmul = pick_clmul();

constexpr std::array<uint8_t, 256> make_rev8() {
  std::array<uint8_t, 256> t{};
  for (int i = 0; i < 256; ++i) {
    uint8_t r = 0;
    for (int b = 0; b < 8; ++b) {
      if (i & (1 << b)) r = static_cast<uint8_t>(r | (1 << (7 - b)));
    }
    t[i] = r;
  }
  return t;
}

constexpr std::array<uint8_t, 256> kRev8 = make_rev8();

}  // namespace

void clmul64(uint64_t a, uint64_t b, uint64_t& lo, uint64_t& hi) { kClmul(a, b, lo, hi); }

Gf8 Gf8::operator*(Gf8 o) const {
  if (v == 0 || o.v == 0) return Gf8{0};
  return Gf8{kGf8.exp[kGf8.log[v] + kGf8.log[o.v]]};
}

Gf8 Gf8::inverse() const {
  if (v == 0) return Gf8{0};
  return Gf8{kGf8.exp[255 - kGf8.log[v]]};
}

Gf64 Gf64::operator*(Gf64 o) const {
  uint64_t lo, hi;
  kClmul(v, o.v, lo, hi);
  // x^64 = x^4 + x^3 + x + 1
  lo ^= hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4);
  uint64_t spill = (hi >> 63) ^ (hi >> 61) ^ (hi >> 60);
  lo ^= spill ^ (spill << 1) ^ (spill << 3) ^ (spill << 4);
  return Gf64{lo};
}

Gf64 Gf64::inverse() const {
  // a^(2^64 - 2)
  Gf64 result = one();
  Gf64 s = *this;
  for (int i = 1; i < 64; ++i) {
    s = s * s;
    result = result * s;
  }
  return result;
}


Gf128 Gf128::operator*(Gf128 o) const {
  uint64_t a0, a1, b0, b1, c0, c1, d0, d1;
  kClmul(lo, o.lo, a0, a1);
  kClmul(hi, o.hi, d0, d1);
  kClmul(lo, o.hi, b0, b1);
  kClmul(hi, o.lo, c0, c1);
  uint64_t r0 = a0;
  uint64_t r1 = a1 ^ b0 ^ c0;
  uint64_t r2 = d0 ^ b1 ^ c1;
  uint64_t r3 = d1;
  // Fold (r3:r2) * (x^7 + x^2 + x + 1) into (r1:r0).
  uint64_t f0 = r2 ^ (r2 << 1) ^ (r2 << 2) ^ (r2 << 7);
  uint64_t f1 = r3 ^ (r3 << 1) ^ (r3 << 2) ^ (r3 << 7) ^ (r2 >> 63) ^ (r2 >> 62) ^ (r2 >> 57);
  uint64_t f2 = (r3 >> 63) ^ (r3 >> 62) ^ (r3 >> 57);
  f0 ^= f2 ^ (f2 << 1) ^ (f2 << 2) ^ (f2 << 7);
  return Gf128{r0 ^ f0, r1 ^ f1};
}

Gf128 Gf128::inverse() const {
  Gf128 result = one();
  Gf128 s = *this;
  for (int i = 1; i < 128; ++i) {
    s = s * s;
    result = result * s;
  }
  return result;
}

Gf128 Gf128::from_gcm_block(const uint8_t* b) {
  uint64_t l = 0, h = 0;
  for (int j = 0; j < 8; ++j) {
    l |= uint64_t{kRev8[b[j]]} << (8 * j);
    h |= uint64_t{kRev8[b[8 + j]]} << (8 * j);
  }
  return Gf128{l, h};
}

void Gf128::to_gcm_block(uint8_t* b) const {
  for (int j = 0; j < 8; ++j) {
    b[j] = kRev8[(lo >> (8 * j)) & 0xff];
    b[8 + j] = kRev8[(hi >> (8 * j)) & 0xff];
  }
}



static_assert(ShareAlgebra<RingEl64>);
static_assert(ShareAlgebra<Gf8>);
static_assert(ShareAlgebra<Gf64>);
static_assert(ShareAlgebra<Gf128>);
static_assert(ShareAlgebra<Gf2x64>);

}  // namespace mpcpipe
