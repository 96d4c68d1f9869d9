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

#include "mpcpipe/infer/infer.h"

#include <stdexcept>

#include "mpcpipe/common/error.h"
#include "mpcpipe/convert/convert.h"

namespace mpcpipe::infer {
namespace {

// Mask components stay below 2^61 so x + 2^47 + r never wraps 2^64.
constexpr int kMaskBits = 61;

struct TruncMask {
  uint64_t full;
  uint64_t shifted;
};

// Component 0 is uniform below 2^61; components 1 and 2 are multiples of
// 2^f. The carry-free sum then truncates component-wise and exactly.
TruncMask shape(int component, uint64_t raw, int f) {
  if (component == 0) {
    uint64_t v = raw & ((uint64_t{1} << kMaskBits) - 1);
    return {v, v >> f};
  }
  uint64_t t = raw & ((uint64_t{1} << (kMaskBits - f)) - 1);
  return {t << f, t};
}

}  // namespace

ShareVec<RingEl64> truncate(Session& s, const ShareVec<RingEl64>& x, int f) {
  if (f <= 0 || f >= kTruncInputBits) throw std::invalid_argument("truncate: bad shift");
  const size_t n = x.size();
  if (n == 0) return {};
  auto own_raw = s.draw<RingEl64>(s.prf_prev(), n);
  auto next_raw = s.draw<RingEl64>(s.prf_next(), n);
  const int c_own = s.party(), c_next = (s.party() + 1) % 3;

  ShareVec<RingEl64> masked(n), shifted(n);
  const RingEl64 offset{uint64_t{1} << kTruncInputBits};
  for (size_t i = 0; i < n; ++i) {
    auto a = shape(c_own, own_raw[i].v, f);
    auto b = shape(c_next, next_raw[i].v, f);
    masked[i] = rss::add_public(x[i] + rss::Share<RingEl64>{RingEl64{a.full}, RingEl64{b.full}}, s.party(), offset);
    shifted[i] = {RingEl64{a.shifted}, RingEl64{b.shifted}};
  }
  auto z = rss::open(s, masked);

  // An in-range x gives z < 2^48 + 3 * 2^61.
  const uint64_t z_max = (uint64_t{1} << (kTruncInputBits + 1)) + 3 * (uint64_t{1} << kMaskBits);
  const uint64_t back = uint64_t{1} << (kTruncInputBits - f);
  ShareVec<RingEl64> out(n);
  for (size_t i = 0; i < n; ++i) {
    if (s.mal() && z[i].v >= z_max) s.fail(abort_code::kTruncOverflow, "opened value out of range");
    out[i] = rss::add_public(-shifted[i], s.party(), RingEl64{(z[i].v >> f) - back});
  }
  return out;
}

ShareMatrix dense(Session& s, const ShareMatrix& x, const ShareMatrix& w, const ShareVec<RingEl64>& b,
                  int f) {
  if (x.cols != w.rows || b.size() != w.cols) throw std::invalid_argument("dense: dimension mismatch");
  ShareMatrix prod = rss::matmul(s, x, w);
  ShareMatrix y(prod.rows, prod.cols, truncate(s, prod.v, f));
  for (size_t r = 0; r < y.rows; ++r) {
    for (size_t c = 0; c < y.cols; ++c) y.at(r, c) += b[c];
  }
  return y;
}

ShareMatrix relu(Session& s, const ShareMatrix& x) {
  if (x.v.empty()) return x;
  auto positive = convert::flip(convert::msb(convert::a2b(s, x.v)), s.party());
  auto mask = convert::bit_to_arith(s, positive);
  return ShareMatrix(x.rows, x.cols, rss::mul(s, x.v, mask));
}

ShareMatrix infer(Session& s, const ShareMatrix& x, const SharedModel& model) {
  if (model.layers.size() != model.arch.layers.size()) throw std::invalid_argument("infer: incomplete model");
  if (x.cols != model.arch.input_width()) throw std::invalid_argument("infer: input width mismatch");
  ShareMatrix y = x;
  for (size_t j = 0; j < model.layers.size(); ++j) {
    y = dense(s, y, model.layers[j].w, model.layers[j].b, model.arch.frac_bits);
    if (model.arch.layers[j].act == Activation::kRelu) y = relu(s, y);
  }
  return y;
}

size_t BatchLayout::total_rows() const {
  size_t t = 0;
  for (size_t r : rows) t += r;
  return t;
}

std::vector<size_t> BatchLayout::row_owner() const {
  std::vector<size_t> owner;
  for (size_t a = 0; a < rows.size(); ++a) owner.insert(owner.end(), rows[a], a);
  return owner;
}

std::pair<ShareMatrix, BatchLayout> flatten_batch(const std::vector<ShareMatrix>& parts) {
  BatchLayout layout;
  if (!parts.empty()) layout.cols = parts.front().cols;
  ShareMatrix m;
  m.cols = layout.cols;
  for (const auto& p : parts) {
    if (p.cols != layout.cols) throw std::invalid_argument("flatten_batch: column mismatch");
    layout.rows.push_back(p.rows);
    m.v.insert(m.v.end(), p.v.begin(), p.v.end());
    m.rows += p.rows;
  }
  return {std::move(m), std::move(layout)};
}

std::vector<ShareMatrix> unflatten_batch(const ShareMatrix& m, const BatchLayout& layout) {
  if (m.rows != layout.total_rows()) throw std::invalid_argument("unflatten_batch: row count mismatch");
  if (m.rows > 0 && m.cols != layout.cols) throw std::invalid_argument("unflatten_batch: column mismatch");
  std::vector<ShareMatrix> out;
  size_t off = 0;
  for (size_t r : layout.rows) {
    auto first = m.v.begin() + static_cast<std::ptrdiff_t>(off * m.cols);
    out.emplace_back(r, m.cols, ShareVec<RingEl64>(first, first + static_cast<std::ptrdiff_t>(r * m.cols)));
    off += r;
  }
  return out;
}

}  // namespace mpcpipe::infer
