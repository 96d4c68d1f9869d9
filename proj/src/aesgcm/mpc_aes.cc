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

#include "mpcpipe/aesgcm/mpc_aes.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mpcpipe/common/error.h"

namespace mpcpipe::aesgcm {
namespace {

// Blocks per shared AES pass; bounds triple and state memory.
constexpr size_t kChunkBlocks = 2048;

struct SquareTable {
  std::array<uint8_t, 256> t{};
  SquareTable() {
    for (int i = 0; i < 256; ++i) t[i] = Gf8{static_cast<uint8_t>(i)}.square().v;
  }
};

const std::array<uint8_t, 256>& sq_table() {
  static const SquareTable tbl;
  return tbl.t;
}

// x^(2^k), linear over GF(2) and therefore local per component.
ShareVec<Gf8> frob(const ShareVec<Gf8>& x, int k) {
  const auto& t = sq_table();
  ShareVec<Gf8> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    uint8_t o = x[i].own.v, n = x[i].next.v;
    for (int j = 0; j < k; ++j) {
      o = t[o];
      n = t[n];
    }
    r[i] = {Gf8{o}, Gf8{n}};
  }
  return r;
}

template <class F>
void per_component_block(ShareVec<Gf8>& st, size_t block, F&& f) {
  uint8_t own[16], next[16];
  for (size_t b = 0; b < 16; ++b) {
    own[b] = st[16 * block + b].own.v;
    next[b] = st[16 * block + b].next.v;
  }
  f(own);
  f(next);
  for (size_t b = 0; b < 16; ++b) st[16 * block + b] = {Gf8{own[b]}, Gf8{next[b]}};
}

ShareVec<Gf8> aes_chunk(Session& s, std::span<const SharedKeySchedule> keys,
                        std::span<const uint32_t> key_of, std::span<const Block> in) {
  const size_t nb = in.size();
  ShareVec<Gf8> st(16 * nb);
  for (size_t j = 0; j < nb; ++j) {
    const auto& k = keys[key_of[j]].bytes;
    for (size_t b = 0; b < 16; ++b) st[16 * j + b] = rss::add_public(k[b], s.party(), Gf8{in[j][b]});
  }
  for (size_t r = 1; r <= kRounds; ++r) {
    st = sbox_shared(s, st);
    for (size_t j = 0; j < nb; ++j) {
      per_component_block(st, j, [&](uint8_t* c) {
        shift_rows(c);
        if (r != kRounds) mix_columns(c);
      });
      const auto& k = keys[key_of[j]].bytes;
      for (size_t b = 0; b < 16; ++b) st[16 * j + b] += k[16 * r + b];
    }
  }
  return st;
}

Block zero_block() { return Block{}; }

void push_padded(std::vector<Gf128>& out, ByteSpan data) {
  for (size_t off = 0; off < data.size(); off += 16) {
    uint8_t blk[16] = {};
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(off), std::min<size_t>(16, data.size() - off), blk);
    out.push_back(Gf128::from_gcm_block(blk));
  }
}

std::vector<Gf128> ghash_blocks(ByteSpan ad, ByteSpan ct) {
  std::vector<Gf128> x;
  push_padded(x, ad);
  push_padded(x, ct);
  Bytes len;
  put_u64_be(len, static_cast<uint64_t>(ad.size()) * 8);
  put_u64_be(len, static_cast<uint64_t>(ct.size()) * 8);
  x.push_back(Gf128::from_gcm_block(len.data()));
  return x;
}

size_t blocks_for(size_t bytes) { return (bytes + 15) / 16; }

// Shared AES outputs needed by a batch of GCM items: H per key, E(J0) and
// the keystream per item, computed in one pass.
struct GcmMasks {
  std::map<size_t, Share<Gf128>> h;
  std::vector<Share<Gf128>> ej0;
  std::vector<ShareVec<Gf8>> stream;  // trimmed to the payload length
};

GcmMasks gcm_masks(Session& s, std::span<const SharedKeySchedule> keys,
                   const std::vector<size_t>& key_of_item, const std::vector<const Bytes*>& nonce,
                   const std::vector<size_t>& len) {
  std::vector<uint32_t> key_of;
  std::vector<Block> in;
  std::vector<size_t> used_keys;
  for (size_t k : key_of_item) {
    if (k >= keys.size()) throw std::invalid_argument("gcm: key index out of range");
    if (std::find(used_keys.begin(), used_keys.end(), k) == used_keys.end()) used_keys.push_back(k);
  }
  for (size_t k : used_keys) {
    key_of.push_back(static_cast<uint32_t>(k));
    in.push_back(zero_block());
  }
  for (size_t i = 0; i < key_of_item.size(); ++i) {
    if (nonce[i]->size() != kNonceBytes) throw FormatError("gcm: nonce must be 12 bytes");
    size_t nblk = blocks_for(len[i]);
    for (size_t c = 0; c <= nblk; ++c) {
      key_of.push_back(static_cast<uint32_t>(key_of_item[i]));
      in.push_back(counter_block(*nonce[i], static_cast<uint32_t>(c + 1)));
    }
  }
  ShareVec<Gf8> out = aes_encrypt_shared(s, keys, key_of, in);
  GcmMasks m;
  size_t blk = 0;
  for (size_t k : used_keys) m.h[k] = gf128_from_bytes(&out[16 * blk++]);
  for (size_t i = 0; i < key_of_item.size(); ++i) {
    m.ej0.push_back(gf128_from_bytes(&out[16 * blk++]));
    auto first = out.begin() + static_cast<std::ptrdiff_t>(16 * blk);
    m.stream.emplace_back(first, first + static_cast<std::ptrdiff_t>(len[i]));
    blk += blocks_for(len[i]);
  }
  return m;
}

// T = E(J0) + GHASH; opened after every queued product is verified.
std::vector<Bytes> open_tags(Session& s, const GcmMasks& m, const std::vector<Share<Gf128>>& y) {
  ShareVec<Gf128> t(y.size());
  for (size_t i = 0; i < y.size(); ++i) t[i] = y[i] + m.ej0[i];
  if (s.mal()) rss::verify_pending_gf128(s);
  auto open = rss::open(s, t);
  std::vector<Bytes> tags(open.size(), Bytes(kTagBytes));
  for (size_t i = 0; i < open.size(); ++i) open[i].to_gcm_block(tags[i].data());
  return tags;
}

}  // namespace

std::vector<SharedKeySchedule> share_key_schedules(Session& s, std::span<const KeySchedule> mine) {
  const size_t n = kKeyScheduleBytes * mine.size();
  std::vector<Gf8> flat;
  flat.reserve(n);
  for (const auto& k : mine) {
    for (uint8_t b : k) flat.push_back(Gf8{b});
  }
  ShareVec<Gf8> sum(n);
  for (int owner = 0; owner < 3; ++owner) {
    auto part = rss::input<Gf8>(s, owner, owner == s.party() ? std::span<const Gf8>(flat) : std::span<const Gf8>(), n);
    sum = sum + part;
  }
  std::vector<SharedKeySchedule> out(mine.size());
  for (size_t k = 0; k < mine.size(); ++k) {
    auto first = sum.begin() + static_cast<std::ptrdiff_t>(k * kKeyScheduleBytes);
    out[k].bytes.assign(first, first + static_cast<std::ptrdiff_t>(kKeyScheduleBytes));
  }
  return out;
}

ShareVec<Gf8> sbox_shared(Session& s, const ShareVec<Gf8>& x) {
  const size_t n = x.size();
  if (n == 0) return {};
  const size_t sizes[] = {n, 2 * n, n};
  auto t = rss::split_triples(s, rss::triple_gen<Gf8>(s, 4 * n), sizes);

  ShareVec<Gf8> x2 = frob(x, 1);
  ShareVec<Gf8> x3 = rss::mul_beaver(s, x2, x, t[0]);
  ShareVec<Gf8> x12 = frob(x3, 2);

  ShareVec<Gf8> lhs(2 * n), rhs(2 * n);
  std::copy(x12.begin(), x12.end(), lhs.begin());
  std::copy(x12.begin(), x12.end(), lhs.begin() + static_cast<std::ptrdiff_t>(n));
  std::copy(x3.begin(), x3.end(), rhs.begin());
  std::copy(x2.begin(), x2.end(), rhs.begin() + static_cast<std::ptrdiff_t>(n));
  ShareVec<Gf8> r2 = rss::mul_beaver(s, lhs, rhs, t[1]);
  ShareVec<Gf8> x15(r2.begin(), r2.begin() + static_cast<std::ptrdiff_t>(n));
  ShareVec<Gf8> x14(r2.begin() + static_cast<std::ptrdiff_t>(n), r2.end());

  ShareVec<Gf8> x240 = frob(x15, 4);
  ShareVec<Gf8> inv = rss::mul_beaver(s, x240, x14, t[2]);

  for (auto& v : inv) {
    v.own.v = sbox_affine(v.own.v);
    v.next.v = sbox_affine(v.next.v);
    v = rss::add_public(v, s.party(), Gf8{0x63});
  }
  return inv;
}

ShareVec<Gf8> aes_encrypt_shared(Session& s, std::span<const SharedKeySchedule> keys,
                                 std::span<const uint32_t> key_of, std::span<const Block> inputs) {
  if (key_of.size() != inputs.size()) throw std::invalid_argument("aes_encrypt_shared: size mismatch");
  for (uint32_t k : key_of) {
    if (k >= keys.size()) throw std::invalid_argument("aes_encrypt_shared: key index out of range");
  }
  ShareVec<Gf8> out;
  out.reserve(16 * inputs.size());
  for (size_t off = 0; off < inputs.size(); off += kChunkBlocks) {
    size_t nb = std::min(kChunkBlocks, inputs.size() - off);
    auto part = aes_chunk(s, keys, key_of.subspan(off, nb), inputs.subspan(off, nb));
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

ShareVec<Gf8> keystream_shared(Session& s, const SharedKeySchedule& ks, ByteSpan nonce12,
                               uint32_t counter_start, size_t nblocks) {
  std::vector<Block> in(nblocks);
  for (size_t j = 0; j < nblocks; ++j) in[j] = counter_block(nonce12, counter_start + static_cast<uint32_t>(j));
  std::vector<uint32_t> key_of(nblocks, 0);
  return aes_encrypt_shared(s, std::span<const SharedKeySchedule>(&ks, 1), key_of, in);
}

Share<Gf128> gf128_from_bytes(const Share<Gf8>* sixteen) {
  uint8_t own[16], next[16];
  for (int b = 0; b < 16; ++b) {
    own[b] = sixteen[b].own.v;
    next[b] = sixteen[b].next.v;
  }
  return {Gf128::from_gcm_block(own), Gf128::from_gcm_block(next)};
}

void gf128_to_bytes(const Share<Gf128>& x, Share<Gf8>* sixteen) {
  uint8_t own[16], next[16];
  x.own.to_gcm_block(own);
  x.next.to_gcm_block(next);
  for (int b = 0; b < 16; ++b) sixteen[b] = {Gf8{own[b]}, Gf8{next[b]}};
}

std::vector<Share<Gf128>> ghash_shared(Session& s, std::span<const GhashItem> items) {
  std::vector<std::vector<Gf128>> x(items.size());
  size_t rounds = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    x[i] = ghash_blocks(items[i].ad, items[i].ct);
    rounds = std::max(rounds, x[i].size());
  }
  std::vector<size_t> per_round(rounds, 0);
  size_t total = 0;
  for (const auto& xi : x) {
    for (size_t r = 0; r < xi.size(); ++r) ++per_round[r];
    total += xi.size();
  }
  std::vector<Share<Gf128>> y(items.size());
  if (total == 0) return y;
  auto t = rss::split_triples(s, rss::triple_gen<Gf128>(s, total), per_round);

  for (size_t r = 0; r < rounds; ++r) {
    ShareVec<Gf128> u, h;
    std::vector<size_t> idx;
    for (size_t i = 0; i < items.size(); ++i) {
      if (r >= x[i].size()) continue;
      idx.push_back(i);
      u.push_back(rss::add_public(y[i], s.party(), x[i][r]));
      h.push_back(items[i].h);
    }
    ShareVec<Gf128> w = rss::mul_beaver(s, u, h, t[r]);
    for (size_t k = 0; k < idx.size(); ++k) {
      y[idx[k]] = w[k];
      if (s.mal()) s.pending_gf128().push_back({u[k], h[k], w[k]});
    }
  }
  return y;
}

Share<Gf128> ghash_shared(Session& s, const Share<Gf128>& h, ByteSpan ad, ByteSpan ct) {
  GhashItem it{h, Bytes(ad.begin(), ad.end()), Bytes(ct.begin(), ct.end())};
  return ghash_shared(s, std::span<const GhashItem>(&it, 1))[0];
}

std::vector<Bytes> gcm_encrypt_shared(Session& s, std::span<const SharedKeySchedule> keys,
                                      std::span<const GcmEncItem> items) {
  if (items.empty()) return {};
  std::vector<size_t> key_of, len;
  std::vector<const Bytes*> nonce;
  for (const auto& it : items) {
    key_of.push_back(it.key);
    nonce.push_back(&it.nonce);
    len.push_back(it.plaintext.size());
  }
  GcmMasks m = gcm_masks(s, keys, key_of, nonce, len);

  ShareVec<Gf8> ct_share;
  for (size_t i = 0; i < items.size(); ++i) {
    for (size_t b = 0; b < len[i]; ++b) ct_share.push_back(items[i].plaintext[b] + m.stream[i][b]);
  }
  std::vector<Gf8> ct_open = rss::open(s, ct_share);

  std::vector<GhashItem> gh(items.size());
  size_t off = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    gh[i].h = m.h.at(items[i].key);
    gh[i].ad = items[i].ad;
    gh[i].ct.resize(len[i]);
    for (size_t b = 0; b < len[i]; ++b) gh[i].ct[b] = ct_open[off + b].v;
    off += len[i];
  }
  auto tags = open_tags(s, m, ghash_shared(s, gh));

  std::vector<Bytes> out(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    out[i] = std::move(gh[i].ct);
    append(out[i], tags[i]);
  }
  return out;
}

std::vector<std::optional<ShareVec<Gf8>>> gcm_decrypt_shared(
    Session& s, std::span<const SharedKeySchedule> keys, std::span<const GcmDecItem> items) {
  if (items.empty()) return {};
  std::vector<size_t> key_of, len;
  std::vector<const Bytes*> nonce;
  for (const auto& it : items) {
    if (it.tag.size() != kTagBytes) throw FormatError("gcm: tag must be 16 bytes");
    key_of.push_back(it.key);
    nonce.push_back(&it.nonce);
    len.push_back(it.ciphertext.size());
  }
  GcmMasks m = gcm_masks(s, keys, key_of, nonce, len);

  std::vector<GhashItem> gh(items.size());
  for (size_t i = 0; i < items.size(); ++i) gh[i] = {m.h.at(items[i].key), items[i].ad, items[i].ciphertext};
  auto tags = open_tags(s, m, ghash_shared(s, gh));

  std::vector<std::optional<ShareVec<Gf8>>> out(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    if (tags[i] != items[i].tag) continue;
    ShareVec<Gf8> pt(len[i]);
    for (size_t b = 0; b < len[i]; ++b) {
      pt[b] = rss::add_public(m.stream[i][b], s.party(), Gf8{items[i].ciphertext[b]});
    }
    out[i] = std::move(pt);
  }
  return out;
}

}  // namespace mpcpipe::aesgcm
