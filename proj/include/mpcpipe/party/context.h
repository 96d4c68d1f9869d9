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

#include "mpcpipe/aesgcm/aes.h"
#include "mpcpipe/common/crypto.h"
#include "mpcpipe/party/job.h"

namespace mpcpipe::party {

// Symmetric algorithm token bound into every key-share context.
inline constexpr const char* kAlgToken = "AES-128-GCM";
inline constexpr size_t kEnvelopeBytes = 256;

// ad_i for party `party` (0-based): mode byte, then length-prefixed
// ID_user, PK_1..3, ID_data (sorted, 8-byte big-endian each) or
// t_begin || t_end, type, alg and PK_i. PKs are the RSA moduli.
Bytes derive_ad(const AnalysisSpec& a, const std::array<Bytes, 3>& pks, int party);

// RSA-OAEP with label SHA-256(ad); 256 bytes for a 2048-bit key.
Bytes wrap_key_share(const aesgcm::KeySchedule& share, ByteSpan ad, const crypto::RsaKey& pk);
// nullopt when the envelope was made for another context or key.
std::optional<aesgcm::KeySchedule> unwrap_key_share(ByteSpan envelope, ByteSpan ad, const crypto::RsaKey& sk);

// XOR split of the expanded key into three 176-byte shares.
std::array<aesgcm::KeySchedule, 3> split_key_schedule(const aesgcm::KeySchedule& ks);

// Stream jobs are only accepted inside [t_begin, t_end]; ad hoc jobs always.
bool check_stream_window(const AnalysisSpec& a, uint64_t now_ms);

uint64_t now_ms();

}  // namespace mpcpipe::party
