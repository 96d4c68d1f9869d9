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

#include "mpcpipe/aesgcm/aes.h"

#include <stdexcept>

#include "mpcpipe/algebra/gf.h"

namespace mpcpipe::aesgcm {
namespace {

uint8_t rotl8(uint8_t x, int r) { return static_cast<uint8_t>((x << r) | (x >> (8 - r))); }

uint8_t xtime(uint8_t x) { return static_cast<uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0)); }

struct SboxTable {
  std::array<uint8_t, 256> t{};
  SboxTable() {
    for (int i = 0; i < 256; ++i) {
      t[i] = static_cast<uint8_t>(sbox_affine(Gf8{static_cast<uint8_t>(i)}.inverse().v) ^ 0x63);
    }
  }
};

const SboxTable& table() {
  static const SboxTable tbl;
  return tbl;
}

}  // namespace

uint8_t sbox_affine(uint8_t x) {
  return static_cast<uint8_t>(x ^ rotl8(x, 1) ^ rotl8(x, 2) ^ rotl8(x, 3) ^ rotl8(x, 4));
}

uint8_t sbox(uint8_t x) { return table().t[x]; }

KeySchedule expand_key(ByteSpan key16) {
  if (key16.size() != 16) throw std::invalid_argument("expand_key: key must be 16 bytes");
  KeySchedule w{};
  std::copy(key16.begin(), key16.end(), w.begin());
  uint8_t rcon = 1;
  for (size_t i = 4; i < 44; ++i) {
    uint8_t t[4] = {w[4 * i - 4], w[4 * i - 3], w[4 * i - 2], w[4 * i - 1]};
    if (i % 4 == 0) {
      uint8_t t0 = t[0];
      t[0] = static_cast<uint8_t>(sbox(t[1]) ^ rcon);
      t[1] = sbox(t[2]);
      t[2] = sbox(t[3]);
      t[3] = sbox(t0);
      rcon = xtime(rcon);
    }
    for (int b = 0; b < 4; ++b) w[4 * i + b] = static_cast<uint8_t>(w[4 * (i - 4) + b] ^ t[b]);
  }
  return w;
}

void shift_rows(uint8_t* s) {
  uint8_t t[16];
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 4; ++r) t[4 * c + r] = s[4 * ((c + r) % 4) + r];
  }
  std::copy(t, t + 16, s);
}

void mix_columns(uint8_t* s) {
  for (int c = 0; c < 4; ++c) {
    uint8_t* col = s + 4 * c;
    uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
    uint8_t all = static_cast<uint8_t>(a0 ^ a1 ^ a2 ^ a3);
    col[0] = static_cast<uint8_t>(a0 ^ all ^ xtime(static_cast<uint8_t>(a0 ^ a1)));
    col[1] = static_cast<uint8_t>(a1 ^ all ^ xtime(static_cast<uint8_t>(a1 ^ a2)));
    col[2] = static_cast<uint8_t>(a2 ^ all ^ xtime(static_cast<uint8_t>(a2 ^ a3)));
    col[3] = static_cast<uint8_t>(a3 ^ all ^ xtime(static_cast<uint8_t>(a3 ^ a0)));
  }
}

Block encrypt_block(const KeySchedule& ks, const Block& in) {
  Block s = in;
  for (size_t b = 0; b < 16; ++b) s[b] ^= ks[b];
  for (size_t r = 1; r <= kRounds; ++r) {
    for (auto& x : s) x = sbox(x);
    shift_rows(s.data());
    if (r != kRounds) mix_columns(s.data());
    for (size_t b = 0; b < 16; ++b) s[b] ^= ks[16 * r + b];
  }
  return s;
}

Block counter_block(ByteSpan nonce12, uint32_t c) {
  if (nonce12.size() != kNonceBytes) throw std::invalid_argument("counter_block: nonce must be 12 bytes");
  Block b{};
  std::copy(nonce12.begin(), nonce12.end(), b.begin());
  b[12] = static_cast<uint8_t>(c >> 24);
  b[13] = static_cast<uint8_t>(c >> 16);
  b[14] = static_cast<uint8_t>(c >> 8);
  b[15] = static_cast<uint8_t>(c);
  return b;
}

Bytes device_ad(std::string_view id_user, ByteSpan nonce12) {
  Bytes ad;
  put_field(ad, id_user);
  put_field(ad, nonce12);
  return ad;
}

}  // namespace mpcpipe::aesgcm
