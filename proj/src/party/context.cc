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

#include "mpcpipe/party/context.h"

#include <algorithm>
#include <chrono>

#include "mpcpipe/common/error.h"

namespace mpcpipe::party {
namespace {

Bytes be64(uint64_t v) {
  Bytes b;
  put_u64_be(b, v);
  return b;
}

}  // namespace

Bytes derive_ad(const AnalysisSpec& a, const std::array<Bytes, 3>& pks, int party) {
  if (party < 0 || party > 2) throw std::invalid_argument("derive_ad: party index");
  Bytes ad;
  ad.push_back(a.mode == Mode::kAdhoc ? 0x01 : 0x02);
  put_field(ad, a.user);
  for (const auto& pk : pks) put_field(ad, pk);
  if (a.mode == Mode::kAdhoc) {
    auto ids = a.data_ids;
    std::sort(ids.begin(), ids.end());
    Bytes enc;
    for (uint64_t id : ids) put_u64_be(enc, id);
    put_field(ad, enc);
  } else {
    put_field(ad, be64(a.t_begin));
    put_field(ad, be64(a.t_end));
  }
  put_field(ad, a.type);
  put_field(ad, std::string_view(kAlgToken));
  put_field(ad, pks[party]);
  return ad;
}

Bytes wrap_key_share(const aesgcm::KeySchedule& share, ByteSpan ad, const crypto::RsaKey& pk) {
  auto label = crypto::sha256(ad);
  return pk.oaep_encrypt(share, label);
}

std::optional<aesgcm::KeySchedule> unwrap_key_share(ByteSpan envelope, ByteSpan ad, const crypto::RsaKey& sk) {
  if (envelope.size() != kEnvelopeBytes) return std::nullopt;
  auto label = crypto::sha256(ad);
  auto pt = sk.oaep_decrypt(envelope, label);
  if (!pt || pt->size() != aesgcm::kKeyScheduleBytes) return std::nullopt;
  aesgcm::KeySchedule ks{};
  std::copy(pt->begin(), pt->end(), ks.begin());
  return ks;
}

std::array<aesgcm::KeySchedule, 3> split_key_schedule(const aesgcm::KeySchedule& ks) {
  std::array<aesgcm::KeySchedule, 3> s{};
  crypto::random_bytes(s[0]);
  crypto::random_bytes(s[1]);
  for (size_t i = 0; i < ks.size(); ++i) s[2][i] = static_cast<uint8_t>(ks[i] ^ s[0][i] ^ s[1][i]);
  return s;
}

bool check_stream_window(const AnalysisSpec& a, uint64_t now) {
  if (a.mode == Mode::kAdhoc) return true;
  return a.t_begin <= now && now <= a.t_end;
}

uint64_t now_ms() {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count());
}

}  // namespace mpcpipe::party
