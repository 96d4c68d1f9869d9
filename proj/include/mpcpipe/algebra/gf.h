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
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>

#include "mpcpipe/algebra/ring.h"
#include "mpcpipe/common/bytes.h"

namespace mpcpipe {

// GF(2^8) modulo the AES polynomial x^8 + x^4 + x^3 + x + 1.
struct Gf8 {
  uint8_t v = 0;

  static constexpr size_t kBytes = 1;
  static constexpr const char* kName = "GF(2^8)";

  constexpr Gf8() = default;
  constexpr explicit Gf8(uint8_t x) : v(x) {}

  static constexpr Gf8 zero() { return Gf8{0}; }
  static constexpr Gf8 one() { return Gf8{1}; }

  constexpr Gf8 operator+(Gf8 o) const { return Gf8{static_cast<uint8_t>(v ^ o.v)}; }
  constexpr Gf8 operator-(Gf8 o) const { return *this + o; }
  constexpr Gf8 operator-() const { return *this; }
  Gf8 operator*(Gf8 o) const;
  constexpr Gf8& operator+=(Gf8 o) { v ^= o.v; return *this; }
  constexpr Gf8& operator-=(Gf8 o) { v ^= o.v; return *this; }
  Gf8& operator*=(Gf8 o) { return *this = *this * o; }
  constexpr auto operator<=>(const Gf8&) const = default;

  Gf8 square() const { return *this * *this; }
  Gf8 inverse() const;  // inverse(0) == 0, as in the AES S-box

  void write(uint8_t* out) const { out[0] = v; }
  static Gf8 read(const uint8_t* in) { return Gf8{in[0]}; }
};

// GF(2^64) modulo x^64 + x^4 + x^3 + x + 1; bit i holds the coefficient of x^i.
struct Gf64 {
  uint64_t v = 0;

  static constexpr size_t kBytes = 8;
  static constexpr const char* kName = "GF(2^64)";

  constexpr Gf64() = default;
  constexpr explicit Gf64(uint64_t x) : v(x) {}

  static constexpr Gf64 zero() { return Gf64{0}; }
  static constexpr Gf64 one() { return Gf64{1}; }

  constexpr Gf64 operator+(Gf64 o) const { return Gf64{v ^ o.v}; }
  constexpr Gf64 operator-(Gf64 o) const { return *this + o; }
  constexpr Gf64 operator-() const { return *this; }
  Gf64 operator*(Gf64 o) const;
  constexpr Gf64& operator+=(Gf64 o) { v ^= o.v; return *this; }
  constexpr Gf64& operator-=(Gf64 o) { v ^= o.v; return *this; }
  Gf64& operator*=(Gf64 o) { return *this = *this * o; }
  constexpr auto operator<=>(const Gf64&) const = default;

  Gf64 inverse() const;

  void write(uint8_t* out) const { put_u64_le(out, v); }
  static Gf64 read(const uint8_t* in) { return Gf64{get_u64_le(in)}; }
};

// GF(2^128) modulo x^128 + x^7 + x^2 + x + 1 (the GCM field).
//
// Internally bit i of (lo, hi) is the coefficient of x^i. GCM serializes
// blocks with the x^0 coefficient in the most significant bit of byte 0;
// from_gcm_block / to_gcm_block perform that reflection so GHASH computed
// here interoperates with standard AES-GCM.
struct Gf128 {
  uint64_t lo = 0;
  uint64_t hi = 0;

  static constexpr size_t kBytes = 16;
  static constexpr const char* kName = "GF(2^128)";

  constexpr Gf128() = default;
  constexpr Gf128(uint64_t l, uint64_t h) : lo(l), hi(h) {}

  static constexpr Gf128 zero() { return Gf128{}; }
  static constexpr Gf128 one() { return Gf128{1, 0}; }
  static constexpr Gf128 monomial(int i) {
    return i < 64 ? Gf128{uint64_t{1} << i, 0} : Gf128{0, uint64_t{1} << (i - 64)};
  }

  constexpr Gf128 operator+(Gf128 o) const { return Gf128{lo ^ o.lo, hi ^ o.hi}; }
  constexpr Gf128 operator-(Gf128 o) const { return *this + o; }
  constexpr Gf128 operator-() const { return *this; }
  Gf128 operator*(Gf128 o) const;
  constexpr Gf128& operator+=(Gf128 o) { lo ^= o.lo; hi ^= o.hi; return *this; }
  constexpr Gf128& operator-=(Gf128 o) { return *this += o; }
  Gf128& operator*=(Gf128 o) { return *this = *this * o; }
  constexpr auto operator<=>(const Gf128&) const = default;

  constexpr bool bit(int i) const { return ((i < 64 ? lo >> i : hi >> (i - 64)) & 1) != 0; }
  constexpr bool is_zero() const { return lo == 0 && hi == 0; }

  Gf128 square() const { return *this * *this; }
  // a^(2^128 - 2); inverse(0) == 0.
  Gf128 inverse() const;

  static Gf128 from_gcm_block(const uint8_t* block16);
  void to_gcm_block(uint8_t* block16) const;

  // Wire encoding: lo then hi, little-endian.
  void write(uint8_t* out) const {
    put_u64_le(out, lo);
    put_u64_le(out + 8, hi);
  }
  static Gf128 read(const uint8_t* in) { return Gf128{get_u64_le(in), get_u64_le(in + 8)}; }
};

// 64 independent GF(2) lanes packed in one word. AND is multiplication.
struct Gf2x64 {
  uint64_t v = 0;

  static constexpr size_t kBytes = 8;
  static constexpr const char* kName = "GF(2)x64";

  constexpr Gf2x64() = default;
  constexpr explicit Gf2x64(uint64_t x) : v(x) {}

  static constexpr Gf2x64 zero() { return Gf2x64{0}; }
  static constexpr Gf2x64 one() { return Gf2x64{~uint64_t{0}}; }

  constexpr Gf2x64 operator+(Gf2x64 o) const { return Gf2x64{v ^ o.v}; }
  constexpr Gf2x64 operator-(Gf2x64 o) const { return *this + o; }
  constexpr Gf2x64 operator-() const { return *this; }
  constexpr Gf2x64 operator*(Gf2x64 o) const { return Gf2x64{v & o.v}; }
  constexpr Gf2x64& operator+=(Gf2x64 o) { v ^= o.v; return *this; }
  constexpr Gf2x64& operator-=(Gf2x64 o) { v ^= o.v; return *this; }
  constexpr Gf2x64& operator*=(Gf2x64 o) { v &= o.v; return *this; }
  constexpr auto operator<=>(const Gf2x64&) const = default;

  void write(uint8_t* out) const { put_u64_le(out, v); }
  static Gf2x64 read(const uint8_t* in) { return Gf2x64{get_u64_le(in)}; }
};

// Requirements on an element type used by the sharing protocols.
template <class T>
concept ShareAlgebra = requires(T a, T b, const uint8_t* in, uint8_t* out) {
  { T::zero() } -> std::same_as<T>;
  { a + b } -> std::same_as<T>;
  { a - b } -> std::same_as<T>;
  { a * b } -> std::same_as<T>;
  { -a } -> std::same_as<T>;
  { a == b } -> std::convertible_to<bool>;
  { T::kBytes } -> std::convertible_to<size_t>;
  { a.write(out) };
  { T::read(in) } -> std::same_as<T>;
};

// Carry-less 64x64 -> 128 multiplication. Uses PCLMULQDQ when the CPU has it.
void clmul64(uint64_t a, uint64_t b, uint64_t& lo, uint64_t& hi);

}  // namespace mpcpipe
