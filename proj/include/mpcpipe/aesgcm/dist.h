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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpcpipe/aesgcm/mpc_aes.h"
#include "mpcpipe/algebra/ring.h"

namespace mpcpipe::aesgcm {

// Device sample: 187 fixed-point words, nonce || ct || tag = 1524 bytes.
inline constexpr size_t kSampleValues = 187;
inline constexpr size_t kSamplePlainBytes = kSampleValues * 8;
inline constexpr size_t kSampleRecordBytes = kNonceBytes + kSamplePlainBytes + kTagBytes;
// Result: 5 logits per sample, ct || tag = 56 bytes for one sample.
inline constexpr size_t kClasses = 5;
inline constexpr size_t kResultPlainBytes = kClasses * 8;

inline size_t result_bytes(size_t rows) { return rows * kResultPlainBytes + kTagBytes; }

struct ResultContext {
  std::string id_user;
  std::array<Bytes, 3> pks;  // RSA moduli of parties 1..3
  std::string id_analysis;
  std::string type;
};

// field(ID_user) || field(PK_1) || field(PK_2) || field(PK_3) ||
// field(ID_analysis) || field(type).
Bytes result_ad(const ResultContext& ctx);
// First 12 bytes of SHA-256(ad).
Bytes result_nonce(ByteSpan ad);

struct DecInput {
  Bytes record;  // nonce || ct || tag
  std::string id_user;
  size_t key = 0;
};

// Per record: 187 ring sharings (8 bytes little-endian per value), or
// nullopt when authentication fails. Throws FormatError unless every record
// is exactly 1524 bytes.
std::vector<std::optional<ShareVec<RingEl64>>> dist_dec(Session& s,
                                                        std::span<const SharedKeySchedule> keys,
                                                        std::span<const DecInput> records);

struct EncInput {
  ShareVec<RingEl64> y;  // rows x 5, row-major
  ResultContext ctx;
  size_t key = 0;
};

// ct || tag per input; 56 bytes for a single row.
std::vector<Bytes> dist_enc(Session& s, std::span<const SharedKeySchedule> keys,
                            std::span<const EncInput> inputs);

std::optional<ShareVec<RingEl64>> dist_dec(Session& s, const SharedKeySchedule& ks, ByteSpan record,
                                           std::string_view id_user);
Bytes dist_enc(Session& s, const SharedKeySchedule& ks, const ShareVec<RingEl64>& y,
               const ResultContext& ctx);

}  // namespace mpcpipe::aesgcm
