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
#include <memory>
#include <optional>
#include <string>

#include "mpcpipe/common/bytes.h"

// Thin RAII wrappers over OpenSSL for the clear-text primitives used at the
// edges of the pipeline: device/user AES-GCM, SHA-256, RSA-OAEP envelopes and
// the counter-mode keystream behind pairwise PRFs.

typedef struct evp_pkey_st EVP_PKEY;
typedef struct evp_cipher_ctx_st EVP_CIPHER_CTX;
typedef struct evp_md_ctx_st EVP_MD_CTX;

namespace mpcpipe::crypto {

using Digest = std::array<uint8_t, 32>;

Digest sha256(ByteSpan data);

class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(ByteSpan data);
  // Digest of everything absorbed so far; the running state is kept.
  Digest peek() const;

 private:
  EVP_MD_CTX* ctx_;
};

void random_bytes(std::span<uint8_t> out);
Bytes random_bytes(size_t n);

inline constexpr size_t kGcmNonceBytes = 12;
inline constexpr size_t kGcmTagBytes = 16;
inline constexpr size_t kAesKeyBytes = 16;

struct GcmOutput {
  Bytes ciphertext;
  std::array<uint8_t, kGcmTagBytes> tag;
};

// AES-128-GCM with a 96-bit nonce.
GcmOutput aes128_gcm_encrypt(ByteSpan key, ByteSpan nonce, ByteSpan ad, ByteSpan plaintext);
// Returns nullopt when the tag does not verify.
std::optional<Bytes> aes128_gcm_decrypt(ByteSpan key, ByteSpan nonce, ByteSpan ad,
                                        ByteSpan ciphertext, ByteSpan tag);

// Single-block AES-128 encryption (ECB), used by tests as an oracle.
std::array<uint8_t, 16> aes128_encrypt_block(ByteSpan key, ByteSpan block);

// AES-128-CTR keystream keyed by a 16-byte seed. Deterministic; two holders of
// the same seed produce identical streams as long as they read the same
// number of bytes in the same order.
class CtrStream {
 public:
  explicit CtrStream(ByteSpan seed16);
  ~CtrStream();
  CtrStream(CtrStream&& other) noexcept;
  CtrStream& operator=(CtrStream&& other) noexcept;
  CtrStream(const CtrStream&) = delete;
  CtrStream& operator=(const CtrStream&) = delete;

  void fill(std::span<uint8_t> out);
  uint64_t next_u64();
  uint64_t bytes_consumed() const { return consumed_; }

 private:
  void refill();

  EVP_CIPHER_CTX* ctx_ = nullptr;
  std::array<uint8_t, 4096> buf_{};
  size_t pos_ = 4096;
  uint64_t consumed_ = 0;
};

// RSA-2048 key pair. Public key bytes used inside associated data are the
// 256-byte big-endian modulus.
class RsaKey {
 public:
  static RsaKey generate(int bits = 2048);
  static RsaKey from_private_pem(const std::string& pem);
  static RsaKey from_public_pem(const std::string& pem);

  RsaKey(RsaKey&&) noexcept;
  RsaKey& operator=(RsaKey&&) noexcept;
  ~RsaKey();

  std::string private_pem() const;
  std::string public_pem() const;
  Bytes modulus() const;
  bool has_private() const { return has_private_; }

  // RSA-OAEP (SHA-256, MGF1-SHA-256) with the label set to `label`.
  Bytes oaep_encrypt(ByteSpan plaintext, ByteSpan label) const;
  std::optional<Bytes> oaep_decrypt(ByteSpan ciphertext, ByteSpan label) const;

 private:
  RsaKey(EVP_PKEY* key, bool has_private) : key_(key), has_private_(has_private) {}
  EVP_PKEY* key_ = nullptr;
  bool has_private_ = false;
};

}  // namespace mpcpipe::crypto
