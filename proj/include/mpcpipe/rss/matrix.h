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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mpcpipe/algebra/ring.h"
#include "mpcpipe/rss/protocols.h"

namespace mpcpipe::rss {

// Row-major matrix of ring sharings.
struct ShareMatrix {
  size_t rows = 0;
  size_t cols = 0;
  ShareVec<RingEl64> v;

  ShareMatrix() = default;
  ShareMatrix(size_t r, size_t c) : rows(r), cols(c), v(r * c) {}
  ShareMatrix(size_t r, size_t c, ShareVec<RingEl64> data);

  Share<RingEl64>& at(size_t r, size_t c) { return v[r * cols + c]; }
  const Share<RingEl64>& at(size_t r, size_t c) const { return v[r * cols + c]; }
};

struct MatTriple {
  uint64_t id = 0;
  ShareMatrix a;  // m x k
  ShareMatrix b;  // k x n
  ShareMatrix c;  // m x n
};

// Plain row-major product over Z_2^64, m x k times k x n.
std::vector<uint64_t> ring_matmul(const std::vector<uint64_t>& x, const std::vector<uint64_t>& y,
                                  size_t m, size_t k, size_t n);

MatTriple mat_triple_gen(Session& s, size_t m, size_t k, size_t n);

// Opens X - A and Y - B; one round, one triple.
ShareMatrix matmul_beaver(Session& s, const ShareMatrix& x, const ShareMatrix& y, MatTriple& t);

ShareMatrix matmul(Session& s, const ShareMatrix& x, const ShareMatrix& y);

}  // namespace mpcpipe::rss
