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

#include <compare>
#include <cstddef>
#include <cstdint>

#include "mpcpipe/common/bytes.h"

namespace mpcpipe {

// Element of Z_{2^64}. Arithmetic wraps.
struct RingEl64 {
  uint64_t v = 0;

  static constexpr size_t kBytes = 8;
  static constexpr const char* kName = "Z2^64";

  constexpr RingEl64() = default;
  constexpr explicit RingEl64(uint64_t x) : v(x) {}

  static constexpr RingEl64 zero() { return RingEl64{0}; }
  static constexpr RingEl64 one() { return RingEl64{1}; }

  constexpr RingEl64 operator+(RingEl64 o) const { return RingEl64{v + o.v}; }
  constexpr RingEl64 operator-(RingEl64 o) const { return RingEl64{v - o.v}; }
  constexpr RingEl64 operator*(RingEl64 o) const { return RingEl64{v * o.v}; }
  constexpr RingEl64 operator-() const { return RingEl64{0 - v}; }
  constexpr RingEl64& operator+=(RingEl64 o) { v += o.v; return *this; }
  constexpr RingEl64& operator-=(RingEl64 o) { v -= o.v; return *this; }
  constexpr RingEl64& operator*=(RingEl64 o) { v *= o.v; return *this; }
  constexpr auto operator<=>(const RingEl64&) const = default;

  constexpr int64_t as_signed() const { return static_cast<int64_t>(v); }

  void write(uint8_t* out) const { put_u64_le(out, v); }
  static RingEl64 read(const uint8_t* in) { return RingEl64{get_u64_le(in)}; }
};

// Number of fractional bits used by the fixed-point encoding throughout.
inline constexpr int kFracBits = 8;

// floor(x * 2^f) in two's complement. Throws std::range_error when
// |x| >= 2^(63-f) or x is not finite.
RingEl64 fp_encode(double x, int frac_bits = kFracBits);
double fp_decode(RingEl64 x, int frac_bits = kFracBits);

}  // namespace mpcpipe
