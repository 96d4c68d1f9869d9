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
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "mpcpipe/common/bytes.h"

namespace mpcpipe::aesgcm {

inline constexpr size_t kBlockBytes = 16;
inline constexpr size_t kRounds = 10;
inline constexpr size_t kKeyScheduleBytes = 16 * (kRounds + 1);
inline constexpr size_t kNonceBytes = 12;
inline constexpr size_t kTagBytes = 16;

using Block = std::array<uint8_t, kBlockBytes>;
using KeySchedule = std::array<uint8_t, kKeyScheduleBytes>;

// S-box computed as the affine map of the GF(2^8) inverse.
uint8_t sbox(uint8_t x);
uint8_t sbox_affine(uint8_t x);  // affine part without the constant 0x63

KeySchedule expand_key(ByteSpan key16);

// Plain AES-128 round structure; the shared evaluation mirrors it.
Block encrypt_block(const KeySchedule& ks, const Block& in);

// State transforms, usable on any XOR component of a shared state.
void shift_rows(uint8_t* s);
void mix_columns(uint8_t* s);

// Initial counter block N || 0x00000001 and the counter block for index c.
Block counter_block(ByteSpan nonce12, uint32_t c);

inline constexpr uint32_t kFirstKeystreamCounter = 2;

// Associated data of a device record: field(ID_user) || field(N), fields
// prefixed with a 2-byte big-endian length.
Bytes device_ad(std::string_view id_user, ByteSpan nonce12);

}  // namespace mpcpipe::aesgcm
