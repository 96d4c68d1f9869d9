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

#include "mpcpipe/algebra/ring.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mpcpipe/common/bytes.h"

namespace mpcpipe {


RingEl64 fp_encode(double x, int frac_bits) {
  if (frac_bits < 0 || frac_bits > 62) throw std::invalid_argument("fp_encode: bad precision");
  const double bound = std::ldexp(1.0, 63 - frac_bits);
  if (!std::isfinite(x) || !(std::fabs(x) < bound)) {
    throw std::range_error("fp_encode: " + std::to_string(x) + " outside fixed-point range");
  }
  const double scaled = std::floor(std::ldexp(x, frac_bits));
  return RingEl64{static_cast<uint64_t>(static_cast<int64_t>(scaled))};
}

double fp_decode(RingEl64 x, int frac_bits) {
  return std::ldexp(static_cast<double>(x.as_signed()), -frac_bits);
}

}  // namespace mpcpipe
