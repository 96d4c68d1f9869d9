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

#include "mpcpipe/common/crypto.h"

#include <openssl/bio.h>
#include <openssl/core_names.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>

#include <cstring>
#include <stdexcept>

namespace mpcpipe::crypto {
namespace {

[[noreturn]] void fail(const char* what) {
  unsigned long e = ERR_get_error();
  char buf[256] = {0};
  if (e != 0) ERR_error_string_n(e, buf, sizeof(buf));
  throw std::runtime_error(std::string(what) + (e ? std::string(": ") + buf : ""));
}

struct CipherCtx {
  CipherCtx() : ctx(EVP_CIPHER_CTX_new()) {
    if (ctx == nullptr) fail("EVP_CIPHER_CTX_new");
  }
  ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
  EVP_CIPHER_CTX* ctx;
};

struct PkeyCtx {
  explicit PkeyCtx(EVP_PKEY* key) : ctx(EVP_PKEY_CTX_new(key, nullptr)) {
    if (ctx == nullptr) fail("EVP_PKEY_CTX_new");
  }
  ~PkeyCtx() { EVP_PKEY_CTX_free(ctx); }
  EVP_PKEY_CTX* ctx;
};

struct Bio {
  Bio() : bio(BIO_new(BIO_s_mem())) {}
  explicit Bio(const std::string& s) : bio(BIO_new_mem_buf(s.data(), static_cast<int>(s.size()))) {}
  ~Bio() { BIO_free(bio); }
  std::string str() const {
    char* data = nullptr;
    long n = BIO_get_mem_data(bio, &data);
    return std::string(data, static_cast<size_t>(n));
  }
  BIO* bio;
};

void set_oaep(EVP_PKEY_CTX* ctx, ByteSpan label) {
  if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) <= 0) fail("oaep padding");
  if (EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) <= 0) fail("oaep md");
  if (EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256()) <= 0) fail("oaep mgf1");
  // OpenSSL takes ownership of the label buffer.
  auto* copy = static_cast<unsigned char*>(OPENSSL_malloc(label.size() + 1));
  std::memcpy(copy, label.data(), label.size());
  if (EVP_PKEY_CTX_set0_rsa_oaep_label(ctx, copy, static_cast<int>(label.size())) <= 0) {
    OPENSSL_free(copy);
    fail("oaep label");
  }
}

}  // namespace

Digest sha256(ByteSpan data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail("sha256");
  }
  return out;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) fail("sha256 init");
}
Sha256::~Sha256() { EVP_MD_CTX_free(ctx_); }

void Sha256::update(ByteSpan data) {
  if (EVP_DigestUpdate(ctx_, data.data(), data.size()) != 1) fail("sha256 update");
}

Digest Sha256::peek() const {
  EVP_MD_CTX* copy = EVP_MD_CTX_new();
  if (copy == nullptr || EVP_MD_CTX_copy_ex(copy, ctx_) != 1) fail("sha256 copy");
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(copy, out.data(), &len);
  EVP_MD_CTX_free(copy);
  return out;
}

void random_bytes(std::span<uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) fail("RAND_bytes");
}

Bytes random_bytes(size_t n) {
  Bytes b(n);
  random_bytes(b);
  return b;
}

GcmOutput aes128_gcm_encrypt(ByteSpan key, ByteSpan nonce, ByteSpan ad, ByteSpan plaintext) {
  if (key.size() != kAesKeyBytes || nonce.size() != kGcmNonceBytes) {
    throw std::invalid_argument("aes128_gcm_encrypt: bad key or nonce size");
  }
  CipherCtx c;
  GcmOutput out;
  out.ciphertext.resize(plaintext.size());
  int len = 0;
  if (EVP_EncryptInit_ex(c.ctx, EVP_aes_128_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) != 1 ||
      EVP_EncryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) != 1) {
    fail("gcm init");
  }
  if (!ad.empty() &&
      EVP_EncryptUpdate(c.ctx, nullptr, &len, ad.data(), static_cast<int>(ad.size())) != 1) {
    fail("gcm ad");
  }
  if (!plaintext.empty() && EVP_EncryptUpdate(c.ctx, out.ciphertext.data(), &len, plaintext.data(),
                                              static_cast<int>(plaintext.size())) != 1) {
    fail("gcm update");
  }
  if (EVP_EncryptFinal_ex(c.ctx, out.ciphertext.data() + out.ciphertext.size(), &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, 16, out.tag.data()) != 1) {
    fail("gcm final");
  }
  return out;
}

std::optional<Bytes> aes128_gcm_decrypt(ByteSpan key, ByteSpan nonce, ByteSpan ad,
                                        ByteSpan ciphertext, ByteSpan tag) {
  if (key.size() != kAesKeyBytes || nonce.size() != kGcmNonceBytes || tag.size() != kGcmTagBytes) {
    throw std::invalid_argument("aes128_gcm_decrypt: bad key, nonce or tag size");
  }
  CipherCtx c;
  Bytes pt(ciphertext.size());
  int len = 0;
  if (EVP_DecryptInit_ex(c.ctx, EVP_aes_128_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) != 1 ||
      EVP_DecryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) != 1) {
    fail("gcm init");
  }
  if (!ad.empty() &&
      EVP_DecryptUpdate(c.ctx, nullptr, &len, ad.data(), static_cast<int>(ad.size())) != 1) {
    fail("gcm ad");
  }
  if (!ciphertext.empty() && EVP_DecryptUpdate(c.ctx, pt.data(), &len, ciphertext.data(),
                                               static_cast<int>(ciphertext.size())) != 1) {
    fail("gcm update");
  }
  Bytes tag_copy(tag.begin(), tag.end());
  if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, 16, tag_copy.data()) != 1) fail("gcm tag");
  if (EVP_DecryptFinal_ex(c.ctx, pt.data() + pt.size(), &len) != 1) return std::nullopt;
  return pt;
}

std::array<uint8_t, 16> aes128_encrypt_block(ByteSpan key, ByteSpan block) {
  if (key.size() != 16 || block.size() != 16) throw std::invalid_argument("aes block size");
  CipherCtx c;
  std::array<uint8_t, 16> out{};
  int len = 0;
  if (EVP_EncryptInit_ex(c.ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1) fail("ecb");
  EVP_CIPHER_CTX_set_padding(c.ctx, 0);
  if (EVP_EncryptUpdate(c.ctx, out.data(), &len, block.data(), 16) != 1) fail("ecb update");
  return out;
}

CtrStream::CtrStream(ByteSpan seed16) : ctx_(EVP_CIPHER_CTX_new()) {
  if (seed16.size() != 16) throw std::invalid_argument("CtrStream: seed must be 16 bytes");
  uint8_t iv[16] = {0};
  if (ctx_ == nullptr ||
      EVP_EncryptInit_ex(ctx_, EVP_aes_128_ctr(), nullptr, seed16.data(), iv) != 1) {
    fail("ctr init");
  }
}

CtrStream::~CtrStream() { EVP_CIPHER_CTX_free(ctx_); }

CtrStream::CtrStream(CtrStream&& other) noexcept
    : ctx_(other.ctx_), buf_(other.buf_), pos_(other.pos_), consumed_(other.consumed_) {
  other.ctx_ = nullptr;
}

CtrStream& CtrStream::operator=(CtrStream&& other) noexcept {
  if (this != &other) {
    EVP_CIPHER_CTX_free(ctx_);
    ctx_ = other.ctx_;
    buf_ = other.buf_;
    pos_ = other.pos_;
    consumed_ = other.consumed_;
    other.ctx_ = nullptr;
  }
  return *this;
}

void CtrStream::refill() {
  static const std::array<uint8_t, 4096> kZeros{};
  int len = 0;
  if (EVP_EncryptUpdate(ctx_, buf_.data(), &len, kZeros.data(), static_cast<int>(kZeros.size())) !=
      1) {
    fail("ctr update");
  }
  pos_ = 0;
}

void CtrStream::fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
  consumed_ += out.size();
}

uint64_t CtrStream::next_u64() {
  uint8_t b[8];
  fill(b);
  uint64_t v = 0;
  std::memcpy(&v, b, 8);
  return v;
}

RsaKey RsaKey::generate(int bits) {
  EVP_PKEY* key = EVP_RSA_gen(static_cast<unsigned int>(bits));
  if (key == nullptr) fail("EVP_RSA_gen");
  return RsaKey(key, true);
}

RsaKey RsaKey::from_private_pem(const std::string& pem) {
  Bio b(pem);
  EVP_PKEY* key = PEM_read_bio_PrivateKey(b.bio, nullptr, nullptr, nullptr);
  if (key == nullptr) fail("PEM_read_bio_PrivateKey");
  return RsaKey(key, true);
}

RsaKey RsaKey::from_public_pem(const std::string& pem) {
  Bio b(pem);
  EVP_PKEY* key = PEM_read_bio_PUBKEY(b.bio, nullptr, nullptr, nullptr);
  if (key == nullptr) fail("PEM_read_bio_PUBKEY");
  return RsaKey(key, false);
}

RsaKey::RsaKey(RsaKey&& o) noexcept : key_(o.key_), has_private_(o.has_private_) {
  o.key_ = nullptr;
}

RsaKey& RsaKey::operator=(RsaKey&& o) noexcept {
  if (this != &o) {
    EVP_PKEY_free(key_);
    key_ = o.key_;
    has_private_ = o.has_private_;
    o.key_ = nullptr;
  }
  return *this;
}

RsaKey::~RsaKey() { EVP_PKEY_free(key_); }

std::string RsaKey::private_pem() const {
  if (!has_private_) throw std::logic_error("no private key");
  Bio b;
  if (PEM_write_bio_PrivateKey(b.bio, key_, nullptr, nullptr, 0, nullptr, nullptr) != 1) {
    fail("PEM_write_bio_PrivateKey");
  }
  return b.str();
}

std::string RsaKey::public_pem() const {
  Bio b;
  if (PEM_write_bio_PUBKEY(b.bio, key_) != 1) fail("PEM_write_bio_PUBKEY");
  return b.str();
}

Bytes RsaKey::modulus() const {
  BIGNUM* n = nullptr;
  if (EVP_PKEY_get_bn_param(key_, OSSL_PKEY_PARAM_RSA_N, &n) != 1) fail("rsa modulus");
  Bytes out(static_cast<size_t>(EVP_PKEY_get_size(key_)));
  BN_bn2binpad(n, out.data(), static_cast<int>(out.size()));
  BN_free(n);
  return out;
}

Bytes RsaKey::oaep_encrypt(ByteSpan plaintext, ByteSpan label) const {
  PkeyCtx c(key_);
  if (EVP_PKEY_encrypt_init(c.ctx) <= 0) fail("encrypt init");
  set_oaep(c.ctx, label);
  size_t outlen = 0;
  if (EVP_PKEY_encrypt(c.ctx, nullptr, &outlen, plaintext.data(), plaintext.size()) <= 0) {
    fail("oaep size");
  }
  Bytes out(outlen);
  if (EVP_PKEY_encrypt(c.ctx, out.data(), &outlen, plaintext.data(), plaintext.size()) <= 0) {
    fail("oaep encrypt");
  }
  out.resize(outlen);
  return out;
}

std::optional<Bytes> RsaKey::oaep_decrypt(ByteSpan ciphertext, ByteSpan label) const {
  if (!has_private_) throw std::logic_error("no private key");
  PkeyCtx c(key_);
  if (EVP_PKEY_decrypt_init(c.ctx) <= 0) fail("decrypt init");
  set_oaep(c.ctx, label);
  size_t outlen = 0;
  if (EVP_PKEY_decrypt(c.ctx, nullptr, &outlen, ciphertext.data(), ciphertext.size()) <= 0) {
    ERR_clear_error();
    return std::nullopt;
  }
  Bytes out(outlen);
  if (EVP_PKEY_decrypt(c.ctx, out.data(), &outlen, ciphertext.data(), ciphertext.size()) <= 0) {
    ERR_clear_error();
    return std::nullopt;
  }
  out.resize(outlen);
  return out;
}

}  // namespace mpcpipe::crypto
