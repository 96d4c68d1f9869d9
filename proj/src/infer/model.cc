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

#include "mpcpipe/infer/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "mpcpipe/common/crypto.h"
#include "mpcpipe/common/error.h"

namespace mpcpipe::infer {
namespace {

constexpr char kMagic[8] = {'M', 'P', 'C', 'P', 'M', 'D', 'L', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(Bytes& out, uint32_t v) { put_u32_be(out, v); }

void put_shares(Bytes& out, const rss::ShareVec<RingEl64>& v) {
  size_t off = out.size();
  out.resize(off + 16 * v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    v[i].own.write(out.data() + off + 16 * i);
    v[i].next.write(out.data() + off + 16 * i + 8);
  }
}

class Reader {
 public:
  explicit Reader(ByteSpan b) : b_(b) {}
  ByteSpan take(size_t n) {
    if (n > b_.size() - pos_) throw FormatError("model share: truncated file");
    auto r = b_.subspan(pos_, n);
    pos_ += n;
    return r;
  }
  uint8_t u8() { return take(1)[0]; }
  uint32_t u32() { return get_u32_be(take(4).data()); }
  rss::ShareVec<RingEl64> shares(size_t n) {
    if (n > (b_.size() - pos_) / 16) throw FormatError("model share: truncated file");
    auto s = take(16 * n);
    rss::ShareVec<RingEl64> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = {RingEl64::read(s.data() + 16 * i), RingEl64::read(s.data() + 16 * i + 8)};
    return v;
  }
  size_t remaining() const { return b_.size() - pos_; }

 private:
  ByteSpan b_;
  size_t pos_ = 0;
};

RingEl64 random_ring() {
  uint8_t buf[8];
  crypto::random_bytes(buf);
  return RingEl64::read(buf);
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "linear"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "linear") return Activation::kLinear;
  throw std::invalid_argument("unknown activation: " + s);
}

void Architecture::validate() const {
  if (layers.empty()) throw std::invalid_argument("architecture has no layers");
  if (frac_bits < 0 || frac_bits > 30) throw std::invalid_argument("frac_bits out of range");
  for (size_t j = 0; j < layers.size(); ++j) {
    if (layers[j].in == 0 || layers[j].out == 0) throw std::invalid_argument("zero layer dimension");
    if (j > 0 && layers[j].in != layers[j - 1].out) {
      throw std::invalid_argument("layer " + std::to_string(j) + " input does not match previous output");
    }
  }
}

Architecture reference_architecture() {
  Architecture a;
  a.layers = {{187, 50, Activation::kRelu},
              {50, 50, Activation::kRelu},
              {50, 50, Activation::kRelu},
              {50, 50, Activation::kRelu},
              {50, 5, Activation::kLinear}};
  return a;
}

PlainModel PlainModel::from_json(const std::string& text) {
  PlainModel m;
  try {
    auto j = nlohmann::json::parse(text);
    m.arch.frac_bits = j.value("frac_bits", kFracBits);
    for (const auto& l : j.at("layers")) {
      LayerSpec spec{l.at("in").get<size_t>(), l.at("out").get<size_t>(),
                     parse_activation(l.value("activation", std::string("linear")))};
      PlainLayer pl;
      const auto& w = l.at("weights");
      if (w.size() != spec.in) throw FormatError("model json: weights must have `in` rows");
      for (const auto& row : w) {
        if (row.size() != spec.out) throw FormatError("model json: weight row must have `out` entries");
        for (const auto& x : row) pl.w.push_back(x.get<double>());
      }
      pl.b = l.at("bias").get<std::vector<double>>();
      if (pl.b.size() != spec.out) throw FormatError("model json: bias must have `out` entries");
      m.arch.layers.push_back(spec);
      m.layers.push_back(std::move(pl));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model json: ") + e.what());
  }
  try {
    m.arch.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model json: ") + e.what());
  }
  return m;
}

std::string PlainModel::to_json() const {
  nlohmann::json j;
  j["frac_bits"] = arch.frac_bits;
  j["layers"] = nlohmann::json::array();
  for (size_t k = 0; k < layers.size(); ++k) {
    const auto& spec = arch.layers[k];
    nlohmann::json l;
    l["in"] = spec.in;
    l["out"] = spec.out;
    l["activation"] = to_string(spec.act);
    nlohmann::json w = nlohmann::json::array();
    for (size_t r = 0; r < spec.in; ++r) {
      w.push_back(std::vector<double>(layers[k].w.begin() + static_cast<std::ptrdiff_t>(r * spec.out),
                                      layers[k].w.begin() + static_cast<std::ptrdiff_t>((r + 1) * spec.out)));
    }
    l["weights"] = std::move(w);
    l["bias"] = layers[k].b;
    j["layers"].push_back(std::move(l));
  }
  return j.dump();
}

std::vector<double> forward_float(const PlainModel& m, const std::vector<double>& x, size_t rows) {
  std::vector<double> cur = x;
  for (size_t k = 0; k < m.layers.size(); ++k) {
    const auto& spec = m.arch.layers[k];
    if (cur.size() != rows * spec.in) throw std::invalid_argument("forward_float: input size mismatch");
    std::vector<double> nxt(rows * spec.out);
    for (size_t r = 0; r < rows; ++r) {
      for (size_t o = 0; o < spec.out; ++o) {
        double acc = m.layers[k].b[o];
        for (size_t i = 0; i < spec.in; ++i) acc += cur[r * spec.in + i] * m.layers[k].w[i * spec.out + o];
        nxt[r * spec.out + o] = spec.act == Activation::kRelu ? std::max(acc, 0.0) : acc;
      }
    }
    cur = std::move(nxt);
  }
  return cur;
}

std::array<SharedModel, 3> share_model(const PlainModel& m) {
  m.arch.validate();
  std::array<SharedModel, 3> out;
  auto deal = [&](double x, auto&& sink) {
    auto sh = rss::share_secret(fp_encode(x, m.arch.frac_bits), random_ring(), random_ring());
    for (int p = 0; p < 3; ++p) sink(p, sh[p]);
  };
  for (int p = 0; p < 3; ++p) out[p].arch = m.arch;
  for (size_t k = 0; k < m.layers.size(); ++k) {
    const auto& spec = m.arch.layers[k];
    if (m.layers[k].w.size() != spec.in * spec.out || m.layers[k].b.size() != spec.out) {
      throw std::invalid_argument("share_model: parameter count mismatch");
    }
    for (int p = 0; p < 3; ++p) {
      out[p].layers.push_back({rss::ShareMatrix(spec.in, spec.out), rss::ShareVec<RingEl64>(spec.out)});
    }
    for (size_t i = 0; i < m.layers[k].w.size(); ++i) {
      deal(m.layers[k].w[i], [&](int p, auto s) { out[p].layers[k].w.v[i] = s; });
    }
    for (size_t i = 0; i < spec.out; ++i) {
      deal(m.layers[k].b[i], [&](int p, auto s) { out[p].layers[k].b[i] = s; });
    }
  }
  return out;
}

Bytes write_model_share(const SharedModel& m, int party) {
  Bytes out(kMagic, kMagic + 8);
  put_u32(out, kVersion);
  out.push_back(static_cast<uint8_t>(party));
  out.push_back(static_cast<uint8_t>(m.arch.frac_bits));
  put_u32(out, static_cast<uint32_t>(m.arch.layers.size()));
  for (const auto& l : m.arch.layers) {
    put_u32(out, static_cast<uint32_t>(l.in));
    put_u32(out, static_cast<uint32_t>(l.out));
    out.push_back(static_cast<uint8_t>(l.act));
  }
  for (const auto& l : m.layers) {
    put_shares(out, l.w.v);
    put_shares(out, l.b);
  }
  auto d = crypto::sha256(out);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

SharedModel read_model_share(ByteSpan file, int expected_party) {
  if (file.size() < 8 + 32) throw FormatError("model share: file too short");
  auto body = file.first(file.size() - 32);
  auto d = crypto::sha256(body);
  if (!std::equal(d.begin(), d.end(), file.end() - 32)) throw FormatError("model share: checksum mismatch");
  Reader r(body);
  auto magic = r.take(8);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw FormatError("model share: bad magic");
  if (r.u32() != kVersion) throw FormatError("model share: unsupported version");
  int party = r.u8();
  if (party != expected_party) {
    throw FormatError("model share: file is for party " + std::to_string(party + 1) + ", not " +
                      std::to_string(expected_party + 1));
  }
  SharedModel m;
  m.arch.frac_bits = r.u8();
  uint32_t n = r.u32();
  if (n == 0 || n > 1024) throw FormatError("model share: bad layer count");
  for (uint32_t k = 0; k < n; ++k) {
    LayerSpec l;
    l.in = r.u32();
    l.out = r.u32();
    uint8_t act = r.u8();
    if (act > 1) throw FormatError("model share: bad activation");
    l.act = static_cast<Activation>(act);
    m.arch.layers.push_back(l);
  }
  try {
    m.arch.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model share: ") + e.what());
  }
  for (const auto& l : m.arch.layers) {
    SharedLayer sl;
    sl.w = rss::ShareMatrix(l.in, l.out, r.shares(l.in * l.out));
    sl.b = r.shares(l.out);
    m.layers.push_back(std::move(sl));
  }
  if (r.remaining() != 0) throw FormatError("model share: trailing bytes");
  return m;
}

PlainModel random_model(const Architecture& arch, uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PlainModel m;
  m.arch = arch;
  for (const auto& l : arch.layers) {
    const double ws = std::sqrt(6.0 / static_cast<double>(l.in));
    PlainLayer pl;
    for (size_t i = 0; i < l.in * l.out; ++i) pl.w.push_back(u(rng) * ws);
    for (size_t i = 0; i < l.out; ++i) pl.b.push_back(u(rng) * 0.1);
    m.layers.push_back(std::move(pl));
  }
  return m;
}

PlainModel quantize(const PlainModel& m) {
  PlainModel q = m;
  for (auto& l : q.layers) {
    for (auto& w : l.w) w = fp_decode(fp_encode(w, m.arch.frac_bits), m.arch.frac_bits);
    for (auto& b : l.b) b = fp_decode(fp_encode(b, m.arch.frac_bits), m.arch.frac_bits);
  }
  return q;
}

}  // namespace mpcpipe::infer
