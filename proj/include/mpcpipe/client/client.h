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
#include <string>
#include <vector>

#include "mpcpipe/aesgcm/dist.h"
#include "mpcpipe/common/crypto.h"
#include "mpcpipe/party/job.h"

namespace mpcpipe::client {

// Device-side state: key, monotone nonce counter and owning user.
struct DeviceState {
  std::array<uint8_t, 16> key{};
  uint64_t counter = 0;
  std::string user;
  uint64_t last_ts = 0;  // last data-point ID sent, keeps IDs strictly increasing

  std::string to_kv() const;
  static DeviceState from_kv(const std::string& text);
};

// 96-bit big-endian counter nonce: four zero bytes then the counter.
Bytes device_nonce(uint64_t counter);
// 187 reals to 1496 bytes of fixed-point words, f = 8.
Bytes encode_sample(const std::vector<double>& sample);
// nonce || ct || tag with ad = field(user) || field(nonce). Advances the
// counter; throws std::overflow_error once the counter is exhausted, which
// means the key must be rotated.
Bytes device_encrypt(DeviceState& st, const std::vector<double>& sample);

// Expands the key, XOR-splits the schedule and wraps share i under PK_i
// bound to ad_i. Three 256-byte envelopes.
std::array<Bytes, 3> make_keyshares(const std::array<uint8_t, 16>& key, const party::AnalysisSpec& a,
                                    const std::array<const crypto::RsaKey*, 3>& pks);

// Logits per row, or nullopt when the tag does not verify.
std::optional<std::vector<std::array<double, aesgcm::kClasses>>> decrypt_result(
    const std::array<uint8_t, 16>& key, const aesgcm::ResultContext& ctx, ByteSpan ct);

// AAMI EC57 heartbeat classes in model output order.
inline constexpr std::array<char, aesgcm::kClasses> kClassLabels{'N', 'S', 'V', 'F', 'Q'};
size_t argmax(const std::array<double, aesgcm::kClasses>& logits);

// Heartbeat CSV rows: 187 values, optionally followed by a class label
// column (0..4). Blank lines are skipped; anything else throws FormatError.
struct EcgRow {
  std::vector<double> values;
  std::optional<int> label;
};
std::vector<EcgRow> parse_ecg_csv(const std::string& text);

}  // namespace mpcpipe::client
