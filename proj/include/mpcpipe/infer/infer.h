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
#include <vector>

#include "mpcpipe/infer/model.h"
#include "mpcpipe/rss/matrix.h"

namespace mpcpipe::infer {

using rss::Session;
using rss::ShareMatrix;
using rss::ShareVec;

// Inputs must satisfy |x| < 2^47 as signed integers.
inline constexpr int kTruncInputBits = 47;

// floor(x / 2^f) + e with e in {0, 1}. Masks come from the pairwise PRFs,
// so the only message is one broadcast open. In mal-lite an opened value
// outside the reachable range aborts with trunc-overflow.
ShareVec<RingEl64> truncate(Session& s, const ShareVec<RingEl64>& x, int f = kFracBits);

// trunc(X W) + b with b added to every row.
ShareMatrix dense(Session& s, const ShareMatrix& x, const ShareMatrix& w, const ShareVec<RingEl64>& b,
                  int f = kFracBits);

// max(x, 0) in two's complement: x times the shared bit NOT msb(x).
ShareMatrix relu(Session& s, const ShareMatrix& x);

// Rows of 187-wide inputs to rows of 5 logits.
ShareMatrix infer(Session& s, const ShareMatrix& x, const SharedModel& model);

struct BatchLayout {
  std::vector<size_t> rows;  // per analysis
  size_t cols = 0;
  size_t total_rows() const;
  // Analysis index of each flattened row.
  std::vector<size_t> row_owner() const;
};

std::pair<ShareMatrix, BatchLayout> flatten_batch(const std::vector<ShareMatrix>& parts);
// Throws std::invalid_argument on a row or column mismatch.
std::vector<ShareMatrix> unflatten_batch(const ShareMatrix& m, const BatchLayout& layout);

}  // namespace mpcpipe::infer
