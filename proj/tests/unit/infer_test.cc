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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mpcpipe/common/error.h"
#include "mpcpipe/infer/infer.h"
#include "mpcpipe/rss/local.h"
#include "support/mpc_helpers.h"

using namespace mpcpipe;
using namespace mpcpipe::rss;
using namespace mpcpipe::infer;
using testutil::deal;
using testutil::reveal;

namespace {

const SecurityMode kModes[] = {SecurityMode::kSemiHonest, SecurityMode::kMalLite};

// Arithmetic shift, the plaintext truncation oracle.
int64_t floor_shift(int64_t x, int f) { return x >> f; }

std::array<ShareMatrix, 3> deal_matrix(size_t r, size_t c, const std::vector<RingEl64>& v,
                                       std::mt19937_64& rng) {
  auto d = deal(v, rng);
  return {ShareMatrix(r, c, d[0]), ShareMatrix(r, c, d[1]), ShareMatrix(r, c, d[2])};
}

std::vector<RingEl64> encode_all(const std::vector<double>& v) {
  std::vector<RingEl64> r;
  for (double x : v) r.push_back(fp_encode(x));
  return r;
}

size_t argmax(const double* v, size_t n) { return static_cast<size_t>(std::max_element(v, v + n) - v); }

enum class Init { kFanIn, kHe };

// kFanIn: weights and biases in [-1,1]/fan-in. kHe: weights in
// [-1,1] * sqrt(6/fan-in), biases in [-0.1, 0.1].
PlainModel random_model(const Architecture& arch, std::mt19937_64& rng, Init init) {
  PlainModel m;
  m.arch = arch;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& l : arch.layers) {
    const double fan = static_cast<double>(l.in);
    const double ws = init == Init::kHe ? std::sqrt(6.0 / fan) : 1.0 / fan;
    const double bs = init == Init::kHe ? 0.1 : 1.0 / fan;
    PlainLayer pl;
    for (size_t i = 0; i < l.in * l.out; ++i) pl.w.push_back(u(rng) * ws);
    for (size_t i = 0; i < l.out; ++i) pl.b.push_back(u(rng) * bs);
    m.layers.push_back(std::move(pl));
  }
  return m;
}

}  // namespace

TEST_CASE("truncate examples") {
  std::mt19937_64 rng(1);
  auto d = deal<RingEl64>({RingEl64{256}, RingEl64{0}, fp_encode(-1.0)}, rng);
  auto run = run_local([&](Session& s) { return truncate(s, d[s.party()]); });
  run.check();
  auto y = reveal(run.out);
  CHECK((y[0].v == 1 || y[0].v == 2));
  CHECK((y[1].v == 0 || y[1].v == 1));
  CHECK((y[2].as_signed() == -1 || y[2].as_signed() == 0));
}

TEST_CASE("truncate is within one ULP of the shift oracle with mean error at most 0.5") {
  std::mt19937_64 rng(2);
  std::vector<RingEl64> xs;
  for (int i = 0; i < 10000; ++i) {
    int64_t v = static_cast<int64_t>(rng() % (uint64_t{1} << 47)) * ((rng() & 1) ? 1 : -1);
    xs.push_back(RingEl64{static_cast<uint64_t>(v)});
  }
  auto d = deal(xs, rng);
  for (auto mode : kModes) {
    CAPTURE(to_string(mode));
    auto run = run_local({mode}, [&](Session& s) { return truncate(s, d[s.party()]); });
    run.check();
    bool layout = false;
    auto y = reveal(run.out, &layout);
    CHECK(layout);
    double sum = 0;
    int64_t worst = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      int64_t e = y[i].as_signed() - floor_shift(xs[i].as_signed(), kFracBits);
      worst = std::max(worst, std::abs(e));
      CHECK((e == 0 || e == 1));
      sum += static_cast<double>(e);
    }
    CHECK(worst <= 1);
    CHECK(sum / static_cast<double>(xs.size()) <= 0.5 + 0.02);
  }
}

TEST_CASE("a million truncations at f=8 never abort in mal-lite") {
  std::mt19937_64 rng(3);
  constexpr size_t n = 1000000;
  std::vector<RingEl64> xs(n);
  for (auto& x : xs) {
    int64_t v = static_cast<int64_t>(rng() % (uint64_t{1} << 47)) - (int64_t{1} << 46) * 2 + 1;
    x = RingEl64{static_cast<uint64_t>(v)};
  }
  auto d = deal(xs, rng);
  auto run = run_local({SecurityMode::kMalLite}, [&](Session& s) { return truncate(s, d[s.party()]); });
  run.check();
  auto y = reveal(run.out);
  size_t bad = 0;
  for (size_t i = 0; i < n; ++i) {
    int64_t e = y[i].as_signed() - floor_shift(xs[i].as_signed(), kFracBits);
    if (e != 0 && e != 1) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("truncate aborts with trunc-overflow on out-of-range input in mal-lite") {
  std::mt19937_64 rng(4);
  // x + 2^47 lands exactly on the detection bound; most masks push z past it.
  const uint64_t x = (uint64_t{1} << 48) + 3 * (uint64_t{1} << 61) - (uint64_t{1} << 47);
  auto d = deal(std::vector<RingEl64>(64, RingEl64{x}), rng);
  auto run = run_local({SecurityMode::kMalLite}, [&](Session& s) { return truncate(s, d[s.party()]); });
  CHECK_FALSE(run.ok());
  for (const auto& c : run.abort_codes()) CHECK(c == "trunc-overflow");
}

TEST_CASE("dense with identity weights and zero input") {
  std::mt19937_64 rng(5);
  const size_t k = 6;
  std::vector<double> xin = {0.5, -1.25, 3.0, 0.0, -7.5, 2.125};
  std::vector<double> eye(k * k, 0.0), bias = {0.25, -0.5, 1, 2, 3, -4};
  for (size_t i = 0; i < k; ++i) eye[i * k + i] = 1.0;
  auto x = deal_matrix(1, k, encode_all(xin), rng);
  auto zero = deal_matrix(1, k, std::vector<RingEl64>(k), rng);
  auto w = deal_matrix(k, k, encode_all(eye), rng);
  auto bz = deal(std::vector<RingEl64>(k), rng);
  auto b = deal(encode_all(bias), rng);
  auto run = run_local([&](Session& s) {
    int p = s.party();
    auto y1 = dense(s, x[p], w[p], bz[p]);
    auto y2 = dense(s, zero[p], w[p], b[p]);
    y1.v.insert(y1.v.end(), y2.v.begin(), y2.v.end());
    return y1.v;
  });
  run.check();
  auto y = reveal(run.out);
  for (size_t i = 0; i < k; ++i) {
    CHECK(std::abs(y[i].as_signed() - fp_encode(xin[i]).as_signed()) <= 1);
    CHECK(std::abs(y[k + i].as_signed() - fp_encode(bias[i]).as_signed()) <= 1);
  }
}

TEST_CASE("dense on a random 4x187 input is within 2 ULP of the fixed-point oracle") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  const size_t m = 4, k = 187, n = 50;
  std::vector<double> xv(m * k), wv(k * n), bv(n);
  for (auto& v : xv) v = g(rng);
  for (auto& v : wv) v = g(rng) / 8;
  for (auto& v : bv) v = g(rng);
  auto xe = encode_all(xv), we = encode_all(wv), be = encode_all(bv);
  auto x = deal_matrix(m, k, xe, rng);
  auto w = deal_matrix(k, n, we, rng);
  auto b = deal(be, rng);
  for (auto mode : kModes) {
    CAPTURE(to_string(mode));
    auto run = run_local({mode}, [&](Session& s) { return dense(s, x[s.party()], w[s.party()], b[s.party()]).v; });
    run.check();
    auto y = reveal(run.out);
    int64_t worst = 0;
    for (size_t r = 0; r < m; ++r) {
      for (size_t c = 0; c < n; ++c) {
        int64_t acc = 0;
        for (size_t i = 0; i < k; ++i) acc += xe[r * k + i].as_signed() * we[i * n + c].as_signed();
        int64_t want = floor_shift(acc, kFracBits) + be[c].as_signed();
        worst = std::max(worst, std::abs(y[r * n + c].as_signed() - want));
      }
    }
    CHECK(worst <= 2);
  }
}

TEST_CASE("relu examples and 10^4 random values") {
  std::mt19937_64 rng(7);
  std::vector<RingEl64> xs = {fp_encode(-3.5), fp_encode(2.25), RingEl64{0}, RingEl64{uint64_t{1} << 63}};
  for (int i = 0; i < 10000; ++i) xs.push_back(RingEl64{rng()});
  auto d = deal_matrix(1, xs.size(), xs, rng);
  for (auto mode : kModes) {
    CAPTURE(to_string(mode));
    auto run = run_local({mode}, [&](Session& s) { return relu(s, d[s.party()]).v; });
    run.check();
    bool layout = false;
    auto y = reveal(run.out, &layout);
    CHECK(layout);
    CHECK(y[0].v == 0);
    CHECK(y[1] == fp_encode(2.25));
    CHECK(y[2].v == 0);
    CHECK(y[3].v == 0);
    size_t bad = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      uint64_t want = xs[i].as_signed() > 0 ? xs[i].v : 0;
      if (y[i].v != want) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("infer with a single identity layer") {
  std::mt19937_64 rng(8);
  PlainModel pm;
  pm.arch.layers = {{5, 5, Activation::kLinear}};
  PlainLayer l;
  l.w.assign(25, 0.0);
  for (int i = 0; i < 5; ++i) l.w[i * 5 + i] = 1.0;
  l.b.assign(5, 0.0);
  pm.layers = {l};
  auto models = share_model(pm);
  std::vector<double> xin = {1, -2, 0.5, 3.25, -0.125};
  auto x = deal_matrix(1, 5, encode_all(xin), rng);
  auto run = run_local([&](Session& s) { return infer::infer(s, x[s.party()], models[s.party()]).v; });
  run.check();
  auto y = reveal(run.out);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(y[i].as_signed() - fp_encode(xin[i]).as_signed()) <= 1);
}

namespace {

struct Fidelity {
  double agreement = 0;  // against the float pass over the provisioned model
  double max_dev = 0;
  double agreement_unquantized = 0;
  size_t margin_rows = 0;  // oracle top-2 gap above kMargin
  double margin_agreement = 1;
};

constexpr double kMargin = 4.0 / 256;

// The model as provisioned: every parameter passed through the f-bit encoding.
PlainModel quantized(const PlainModel& m) {
  PlainModel q = m;
  for (auto& l : q.layers) {
    for (auto& w : l.w) w = fp_decode(fp_encode(w));
    for (auto& b : l.b) b = fp_decode(fp_encode(b));
  }
  return q;
}

Fidelity check_fidelity(SecurityMode mode, size_t rows, Init init, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto arch = reference_architecture();
  auto pm = random_model(arch, rng, init);
  auto models = share_model(pm);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> xin(rows * 187);
  for (auto& v : xin) v = g(rng);
  auto x = deal_matrix(rows, 187, encode_all(xin), rng);
  auto run = run_local({mode}, [&](Session& s) { return infer::infer(s, x[s.party()], models[s.party()]).v; });
  run.check();
  auto y = reveal(run.out);
  auto ref = forward_float(quantized(pm), xin, rows);
  auto raw = forward_float(pm, xin, rows);
  Fidelity f;
  size_t agree = 0, agree_raw = 0, agree_margin = 0;
  std::vector<double> got(5);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < 5; ++c) {
      got[c] = fp_decode(y[r * 5 + c]);
      f.max_dev = std::max(f.max_dev, std::abs(got[c] - ref[r * 5 + c]));
    }
    if (argmax(got.data(), 5) == argmax(&ref[r * 5], 5)) ++agree;
    if (argmax(got.data(), 5) == argmax(&raw[r * 5], 5)) ++agree_raw;
    std::vector<double> top(&raw[r * 5], &raw[r * 5] + 5);
    std::sort(top.rbegin(), top.rend());
    if (top[0] - top[1] > kMargin) {
      ++f.margin_rows;
      if (argmax(got.data(), 5) == argmax(&raw[r * 5], 5)) ++agree_margin;
    }
  }
  if (f.margin_rows > 0) f.margin_agreement = static_cast<double>(agree_margin) / static_cast<double>(f.margin_rows);
  f.agreement = static_cast<double>(agree) / static_cast<double>(rows);
  f.agreement_unquantized = static_cast<double>(agree_raw) / static_cast<double>(rows);
  return f;
}

}  // namespace

TEST_CASE("inference argmax agrees with the float forward pass") {
  SUBCASE("1000 rows, semi-honest, He-uniform weights") {
    auto f = check_fidelity(SecurityMode::kSemiHonest, 1000, Init::kHe, 11);
    MESSAGE("agreement " << f.agreement << " (unquantized weights " << f.agreement_unquantized
                         << ") max logit deviation " << f.max_dev);
    CHECK(f.agreement >= 0.99);
    CHECK(f.max_dev <= 0.05);
  }
  SUBCASE("100 rows, mal-lite, He-uniform weights") {
    auto f = check_fidelity(SecurityMode::kMalLite, 100, Init::kHe, 12);
    CHECK(f.agreement >= 0.99);
    CHECK(f.max_dev <= 0.05);
  }
  SUBCASE("1000 rows, weights in [-1,1]/fan-in") {
    // Activations shrink below one ULP by the last layer, so the logits are
    // the biases plus sub-ULP noise and raw argmax agreement is a property of
    // the drawn biases. Rows with a clear oracle margin must all agree.
    auto f = check_fidelity(SecurityMode::kSemiHonest, 1000, Init::kFanIn, 13);
    MESSAGE("agreement " << f.agreement_unquantized << ", " << f.margin_rows << " rows with margin, "
                         << f.margin_agreement << " agreement on them, max logit deviation " << f.max_dev);
    CHECK(f.margin_agreement == 1.0);
    CHECK(f.max_dev <= 0.05);
  }
}

TEST_CASE("inference transcript is reproducible under fixed seeds") {
  std::mt19937_64 rng(14);
  auto pm = random_model(reference_architecture(), rng, Init::kHe);
  auto models = share_model(pm);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> xin(3 * 187);
  for (auto& v : xin) v = g(rng);
  auto x = deal_matrix(3, 187, encode_all(xin), rng);
  auto once = [&] {
    auto run = run_local({SecurityMode::kMalLite, 42, "repro"}, [&](Session& s) {
      auto y = infer::infer(s, x[s.party()], models[s.party()]);
      return std::make_pair(y.v, s.transcript_digest());
    });
    run.check();
    return run;
  };
  auto a = once(), b = once();
  for (int p = 0; p < 3; ++p) {
    CHECK(a.out[p]->first == b.out[p]->first);
    CHECK(a.out[p]->second == b.out[p]->second);
  }
}

TEST_CASE("flatten and unflatten are inverse") {
  auto mk = [](size_t rows, size_t cols, uint64_t tag) {
    ShareMatrix m(rows, cols);
    for (size_t i = 0; i < m.v.size(); ++i) m.v[i] = {RingEl64{tag * 1000 + i}, RingEl64{tag}};
    return m;
  };
  SUBCASE("one analysis with one row") {
    auto [m, layout] = flatten_batch({mk(1, 5, 1)});
    CHECK(m.rows == 1);
    auto back = unflatten_batch(m, layout);
    REQUIRE(back.size() == 1);
    CHECK(back[0].v == mk(1, 5, 1).v);
  }
  SUBCASE("sizes 2, 3, 1") {
    std::vector<ShareMatrix> parts = {mk(2, 4, 1), mk(3, 4, 2), mk(1, 4, 3)};
    auto [m, layout] = flatten_batch(parts);
    CHECK(m.rows == 6);
    CHECK(layout.row_owner() == std::vector<size_t>{0, 0, 1, 1, 1, 2});
    auto back = unflatten_batch(m, layout);
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) CHECK(back[i].v == parts[i].v);
  }
  SUBCASE("1000 random layouts") {
    std::mt19937_64 rng(15);
    for (int t = 0; t < 1000; ++t) {
      size_t cols = 1 + rng() % 6;
      std::vector<ShareMatrix> parts;
      for (size_t a = 0, n = rng() % 8; a < n; ++a) parts.push_back(mk(rng() % 5, cols, rng()));
      auto [m, layout] = flatten_batch(parts);
      auto back = unflatten_batch(m, layout);
      REQUIRE(back.size() == parts.size());
      for (size_t i = 0; i < parts.size(); ++i) {
        CHECK(back[i].rows == parts[i].rows);
        CHECK(back[i].v == parts[i].v);
      }
    }
  }
  SUBCASE("mismatches are rejected") {
    auto [m, layout] = flatten_batch({mk(2, 3, 1)});
    layout.rows.push_back(1);
    CHECK_THROWS_AS(unflatten_batch(m, layout), std::invalid_argument);
    CHECK_THROWS_AS(flatten_batch({mk(1, 3, 1), mk(1, 4, 1)}), std::invalid_argument);
  }
}

TEST_CASE("model shares reconstruct and round-trip through the share file") {
  std::mt19937_64 rng(16);
  auto pm = random_model(reference_architecture(), rng, Init::kHe);
  auto models = share_model(pm);
  for (size_t j = 0; j < pm.layers.size(); ++j) {
    for (size_t i = 0; i < pm.layers[j].w.size(); ++i) {
      std::array<Share<RingEl64>, 3> s{models[0].layers[j].w.v[i], models[1].layers[j].w.v[i],
                                       models[2].layers[j].w.v[i]};
      REQUIRE(layout_consistent(s));
      REQUIRE(reconstruct(s) == fp_encode(pm.layers[j].w[i]));
    }
  }
  for (int p = 0; p < 3; ++p) {
    Bytes file = write_model_share(models[p], p);
    auto back = read_model_share(file, p);
    CHECK(back.arch == models[p].arch);
    for (size_t j = 0; j < back.layers.size(); ++j) {
      CHECK(back.layers[j].w.v == models[p].layers[j].w.v);
      CHECK(back.layers[j].b == models[p].layers[j].b);
    }
    CHECK_THROWS_AS(read_model_share(file, (p + 1) % 3), FormatError);
    file[20] ^= 1;
    CHECK_THROWS_AS(read_model_share(file, p), FormatError);
  }
  auto again = PlainModel::from_json(pm.to_json());
  CHECK(again.arch == pm.arch);
  CHECK(again.layers[0].w == pm.layers[0].w);
  CHECK_THROWS_AS(PlainModel::from_json("{\"layers\":[]}"), FormatError);
  CHECK_THROWS_AS(PlainModel::from_json("not json"), FormatError);
}
