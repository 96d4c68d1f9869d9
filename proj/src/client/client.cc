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

#include "mpcpipe/client/client.h"

#include <charconv>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mpcpipe/aesgcm/aes.h"
#include "mpcpipe/common/error.h"
#include "mpcpipe/common/kvconfig.h"
#include "mpcpipe/party/context.h"

namespace mpcpipe::client {

std::string DeviceState::to_kv() const {
  return "user = \"" + user + "\"\nkey = " + hex_encode(key) + "\ncounter = " + std::to_string(counter) +
         "\nlast_ts = " + std::to_string(last_ts) + "\n";
}

DeviceState DeviceState::from_kv(const std::string& text) {
  auto kv = KvConfig::parse(text);
  DeviceState st;
  st.user = kv.get("user");
  Bytes k = hex_decode(kv.get("key"));
  if (k.size() != 16) throw FormatError("device state: key must be 16 bytes");
  std::copy(k.begin(), k.end(), st.key.begin());
  try {
    st.counter = std::stoull(kv.get("counter"));
    st.last_ts = std::stoull(kv.get_or("last_ts", "0"));
  } catch (const std::exception&) {
    throw FormatError("device state: bad counter");
  }
  return st;
}

Bytes device_nonce(uint64_t counter) {
  Bytes n(4, 0);
  put_u64_be(n, counter);
  return n;
}

Bytes encode_sample(const std::vector<double>& sample) {
  if (sample.size() != aesgcm::kSampleValues) {
    throw FormatError("sample needs " + std::to_string(aesgcm::kSampleValues) + " values, got " +
                      std::to_string(sample.size()));
  }
  Bytes out(aesgcm::kSamplePlainBytes);
  for (size_t i = 0; i < sample.size(); ++i) fp_encode(sample[i]).write(out.data() + 8 * i);
  return out;
}

Bytes device_encrypt(DeviceState& st, const std::vector<double>& sample) {
  if (st.counter == std::numeric_limits<uint64_t>::max()) {
    throw std::overflow_error("device nonce counter exhausted; rotate the key");
  }
  Bytes pt = encode_sample(sample);
  Bytes nonce = device_nonce(st.counter++);
  auto enc = crypto::aes128_gcm_encrypt(st.key, nonce, aesgcm::device_ad(st.user, nonce), pt);
  Bytes rec = nonce;
  append(rec, enc.ciphertext);
  append(rec, enc.tag);
  return rec;
}

std::array<Bytes, 3> make_keyshares(const std::array<uint8_t, 16>& key, const party::AnalysisSpec& a,
                                    const std::array<const crypto::RsaKey*, 3>& pks) {
  std::array<Bytes, 3> moduli;
  for (int i = 0; i < 3; ++i) moduli[i] = pks[i]->modulus();
  auto shares = party::split_key_schedule(aesgcm::expand_key(key));
  std::array<Bytes, 3> env;
  for (int i = 0; i < 3; ++i) env[i] = party::wrap_key_share(shares[i], party::derive_ad(a, moduli, i), *pks[i]);
  return env;
}

std::optional<std::vector<std::array<double, aesgcm::kClasses>>> decrypt_result(
    const std::array<uint8_t, 16>& key, const aesgcm::ResultContext& ctx, ByteSpan ct) {
  if (ct.size() < aesgcm::kTagBytes || (ct.size() - aesgcm::kTagBytes) % aesgcm::kResultPlainBytes != 0) {
    return std::nullopt;
  }
  Bytes ad = aesgcm::result_ad(ctx);
  Bytes nonce = aesgcm::result_nonce(ad);
  size_t body = ct.size() - aesgcm::kTagBytes;
  auto pt = crypto::aes128_gcm_decrypt(key, nonce, ad, ct.first(body), ct.subspan(body));
  if (!pt) return std::nullopt;
  std::vector<std::array<double, aesgcm::kClasses>> rows(body / aesgcm::kResultPlainBytes);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < aesgcm::kClasses; ++c) {
      rows[r][c] = fp_decode(RingEl64::read(pt->data() + 8 * (r * aesgcm::kClasses + c)));
    }
  }
  return rows;
}

size_t argmax(const std::array<double, aesgcm::kClasses>& logits) {
  size_t best = 0;
  for (size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

std::vector<EcgRow> parse_ecg_csv(const std::string& text) {
  std::vector<EcgRow> rows;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> vals;
    size_t pos = 0;
    for (;;) {
      size_t end = line.find(',', pos);
      std::string cell = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      size_t a = cell.find_first_not_of(" \t"), b = cell.find_last_not_of(" \t");
      cell = a == std::string::npos ? "" : cell.substr(a, b - a + 1);
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError("csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      vals.push_back(v);
      if (end == std::string::npos) break;
      pos = end + 1;
    }
    EcgRow r;
    if (vals.size() == aesgcm::kSampleValues + 1) {
      double l = vals.back();
      if (l != static_cast<int>(l) || l < 0 || l >= static_cast<double>(aesgcm::kClasses)) {
        throw FormatError("csv line " + std::to_string(lineno) + ": bad label");
      }
      r.label = static_cast<int>(l);
      vals.pop_back();
    }
    if (vals.size() != aesgcm::kSampleValues) {
      throw FormatError("csv line " + std::to_string(lineno) + ": expected 187 or 188 columns, got " +
                        std::to_string(vals.size()));
    }
    r.values = std::move(vals);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mpcpipe::client
