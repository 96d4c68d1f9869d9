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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpcpipe/aesgcm/aes.h"
#include "mpcpipe/algebra/gf.h"
#include "mpcpipe/rss/protocols.h"

namespace mpcpipe::aesgcm {

using rss::Session;
using rss::Share;
using rss::ShareVec;

// XOR sharing of an expanded AES-128 key, one Gf8 sharing per byte.
struct SharedKeySchedule {
  ShareVec<Gf8> bytes;  // 176
};

// Each party supplies its XOR share k_i of every schedule; the result is
// the sharing of k_1 ^ k_2 ^ k_3. All parties must pass the same count.
std::vector<SharedKeySchedule> share_key_schedules(Session& s, std::span<const KeySchedule> mine);

// S(x) = A(x^254) + 0x63 with x^254 from 4 multiplications in 3 rounds.
ShareVec<Gf8> sbox_shared(Session& s, const ShareVec<Gf8>& x);

// AES-128 of public blocks; block j is enciphered under keys[key_of[j]].
ShareVec<Gf8> aes_encrypt_shared(Session& s, std::span<const SharedKeySchedule> keys,
                                 std::span<const uint32_t> key_of, std::span<const Block> inputs);

// Blocks AES_k(N || counter_start + j) for j < nblocks, concatenated.
ShareVec<Gf8> keystream_shared(Session& s, const SharedKeySchedule& ks, ByteSpan nonce12,
                               uint32_t counter_start, size_t nblocks);

Share<Gf128> gf128_from_bytes(const Share<Gf8>* sixteen);
void gf128_to_bytes(const Share<Gf128>& x, Share<Gf8>* sixteen);

struct GhashItem {
  Share<Gf128> h;
  Bytes ad;
  Bytes ct;
};

// Horner evaluation Y_i = (Y_{i-1} + X_i) H with one shared product per
// block, the length block included. In mal-lite every product is queued on
// the session for verify_pending_gf128.
std::vector<Share<Gf128>> ghash_shared(Session& s, std::span<const GhashItem> items);
Share<Gf128> ghash_shared(Session& s, const Share<Gf128>& h, ByteSpan ad, ByteSpan ct);

struct GcmEncItem {
  size_t key = 0;
  Bytes nonce;
  Bytes ad;
  ShareVec<Gf8> plaintext;
};

struct GcmDecItem {
  size_t key = 0;
  Bytes nonce;
  Bytes ad;
  Bytes ciphertext;
  Bytes tag;
};

// Returns ct || tag per item; ciphertext and tag are opened to all parties.
std::vector<Bytes> gcm_encrypt_shared(Session& s, std::span<const SharedKeySchedule> keys,
                                      std::span<const GcmEncItem> items);

// Shared plaintext per item, or nullopt when the tag does not verify. The
// recomputed tags are opened, so every party sees the same outcome.
std::vector<std::optional<ShareVec<Gf8>>> gcm_decrypt_shared(
    Session& s, std::span<const SharedKeySchedule> keys, std::span<const GcmDecItem> items);

}  // namespace mpcpipe::aesgcm
