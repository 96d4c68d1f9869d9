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

#include "mpcpipe/aesgcm/dist.h"

#include "mpcpipe/common/crypto.h"
#include "mpcpipe/common/error.h"
#include "mpcpipe/convert/convert.h"

namespace mpcpipe::aesgcm {

Bytes result_ad(const ResultContext& ctx) {
  Bytes ad;
  put_field(ad, ctx.id_user);
  for (const auto& pk : ctx.pks) put_field(ad, pk);
  put_field(ad, ctx.id_analysis);
  put_field(ad, ctx.type);
  return ad;
}

Bytes result_nonce(ByteSpan ad) {
  auto d = crypto::sha256(ad);
  return Bytes(d.begin(), d.begin() + kNonceBytes);
}

std::vector<std::optional<ShareVec<RingEl64>>> dist_dec(Session& s,
                                                        std::span<const SharedKeySchedule> keys,
                                                        std::span<const DecInput> records) {
  std::vector<GcmDecItem> items(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const Bytes& r = records[i].record;
    if (r.size() != kSampleRecordBytes) {
      throw FormatError("dist_dec: record length " + std::to_string(r.size()) + ", expected 1524");
    }
    auto& it = items[i];
    it.key = records[i].key;
    it.nonce.assign(r.begin(), r.begin() + kNonceBytes);
    it.ciphertext.assign(r.begin() + kNonceBytes, r.end() - kTagBytes);
    it.tag.assign(r.end() - kTagBytes, r.end());
    it.ad = device_ad(records[i].id_user, it.nonce);
  }
  auto pts = gcm_decrypt_shared(s, keys, items);

  ShareVec<Gf8> all;
  for (const auto& p : pts) {
    if (p) all.insert(all.end(), p->begin(), p->end());
  }
  std::vector<std::optional<ShareVec<RingEl64>>> out(records.size());
  if (all.empty()) {
    for (size_t i = 0; i < pts.size(); ++i) {
      if (pts[i]) out[i] = ShareVec<RingEl64>{};
    }
    return out;
  }
  ShareVec<RingEl64> words = convert::b2a(s, convert::bytes_to_bits64(all));
  size_t off = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i]) continue;
    size_t n = pts[i]->size() / 8;
    auto first = words.begin() + static_cast<std::ptrdiff_t>(off);
    out[i] = ShareVec<RingEl64>(first, first + static_cast<std::ptrdiff_t>(n));
    off += n;
  }
  return out;
}

std::vector<Bytes> dist_enc(Session& s, std::span<const SharedKeySchedule> keys,
                            std::span<const EncInput> inputs) {
  if (inputs.empty()) return {};
  ShareVec<RingEl64> all;
  for (const auto& in : inputs) {
    if (in.y.size() % kClasses != 0) throw std::invalid_argument("dist_enc: result is not rows x 5");
    all.insert(all.end(), in.y.begin(), in.y.end());
  }
  ShareVec<Gf8> bytes = convert::bits64_to_bytes(convert::a2b(s, all));

  std::vector<GcmEncItem> items(inputs.size());
  size_t off = 0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    auto& it = items[i];
    it.key = inputs[i].key;
    it.ad = result_ad(inputs[i].ctx);
    it.nonce = result_nonce(it.ad);
    size_t n = 8 * inputs[i].y.size();
    auto first = bytes.begin() + static_cast<std::ptrdiff_t>(off);
    it.plaintext.assign(first, first + static_cast<std::ptrdiff_t>(n));
    off += n;
  }
  return gcm_encrypt_shared(s, keys, items);
}

std::optional<ShareVec<RingEl64>> dist_dec(Session& s, const SharedKeySchedule& ks, ByteSpan record,
                                           std::string_view id_user) {
  DecInput in{Bytes(record.begin(), record.end()), std::string(id_user), 0};
  return dist_dec(s, std::span<const SharedKeySchedule>(&ks, 1), std::span<const DecInput>(&in, 1))[0];
}

Bytes dist_enc(Session& s, const SharedKeySchedule& ks, const ShareVec<RingEl64>& y,
               const ResultContext& ctx) {
  EncInput in{y, ctx, 0};
  return dist_enc(s, std::span<const SharedKeySchedule>(&ks, 1), std::span<const EncInput>(&in, 1))[0];
}

}  // namespace mpcpipe::aesgcm
