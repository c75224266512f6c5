// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/pki/crypto.hpp"

#include <algorithm>
#include <memory>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>
#include <openssl/sha.h>

namespace pncsim::pki {

namespace {

struct BnFree {
  void operator()(BIGNUM* p) const { BN_clear_free(p); }
};
struct BnCtxFree {
  void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct PointFree {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct GroupFree {
  void operator()(EC_GROUP* p) const { EC_GROUP_free(p); }
};
struct SigFree {
  void operator()(ECDSA_SIG* p) const { ECDSA_SIG_free(p); }
};
struct PkeyFree {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxFree {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct ParamBldFree {
  void operator()(OSSL_PARAM_BLD* p) const { OSSL_PARAM_BLD_free(p); }
};
struct OpenSslFree {
  void operator()(unsigned char* p) const { OPENSSL_free(p); }
};
struct ParamFree {
  void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnFree>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxFree>;
using PointPtr = std::unique_ptr<EC_POINT, PointFree>;
using GroupPtr = std::unique_ptr<EC_GROUP, GroupFree>;

const EC_GROUP* p256() {
  static const GroupPtr group(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
  if (!group) throw CryptoError("P-256 group unavailable");
  return group.get();
}

const BIGNUM* order() { return EC_GROUP_get0_order(p256()); }

BnPtr bn_from(std::span<const std::uint8_t> be) {
  BnPtr bn(BN_bin2bn(be.data(), static_cast<int>(be.size()), nullptr));
  if (!bn) throw CryptoError("BN_bin2bn failed");
  return bn;
}

template <std::size_t N>
std::array<std::uint8_t, N> bn_to(const BIGNUM* bn) {
  std::array<std::uint8_t, N> out{};
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(N)) != static_cast<int>(N)) {
    throw CryptoError("BN_bn2binpad failed");
  }
  return out;
}

bool scalar_in_range(std::span<const std::uint8_t> be) {
  BnPtr k = bn_from(be);
  return !BN_is_zero(k.get()) && BN_cmp(k.get(), order()) < 0;
}

Digest hmac(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) ||
      len != out.size()) {
    throw CryptoError("HMAC-SHA-256 failed");
  }
  return out;
}

Bytes cat(std::initializer_list<std::span<const std::uint8_t>> parts) {
  Bytes out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

Digest sha256(ByteView data) {
  Digest out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

KeyPair derive_keypair(DeterministicRng& rng) {
  for (;;) {
    PrivateKey key{rng.bytes<32>()};
    if (!scalar_in_range(key.scalar)) continue;
    return KeyPair{key, public_key_of(key)};
  }
}

PublicKey public_key_of(const PrivateKey& key) {
  if (!scalar_in_range(key.scalar)) throw CryptoError("private scalar out of range");
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr d = bn_from(key.scalar);
  PointPtr point(EC_POINT_new(p256()));
  if (!ctx || !point || !EC_POINT_mul(p256(), point.get(), d.get(), nullptr, nullptr, ctx.get())) {
    throw CryptoError("scalar multiplication failed");
  }
  PublicKey out{};
  if (EC_POINT_point2oct(p256(), point.get(), POINT_CONVERSION_COMPRESSED, out.data(), out.size(), ctx.get()) !=
      out.size()) {
    throw CryptoError("point encoding failed");
  }
  return out;
}

bool is_valid_public_key(const PublicKey& key) {
  BnCtxPtr ctx(BN_CTX_new());
  PointPtr point(EC_POINT_new(p256()));
  if (!ctx || !point) return false;
  return EC_POINT_oct2point(p256(), point.get(), key.data(), key.size(), ctx.get()) == 1 &&
         EC_POINT_is_on_curve(p256(), point.get(), ctx.get()) == 1;
}

namespace detail {

std::array<std::uint8_t, 32> rfc6979_nonce(const PrivateKey& key, const Digest& digest) {
  // qlen == hlen == 256, so bits2int is the identity on 32-byte strings and
  // bits2octets reduces the digest once modulo q.
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr h = bn_from(digest);
  if (BN_cmp(h.get(), order()) >= 0) BN_sub(h.get(), h.get(), order());
  auto h_octets = bn_to<32>(h.get());

  std::array<std::uint8_t, 32> v;
  std::array<std::uint8_t, 32> k;
  v.fill(0x01);
  k.fill(0x00);
  const std::uint8_t zero[] = {0x00};
  const std::uint8_t one[] = {0x01};

  k = hmac(k, cat({v, zero, key.scalar, h_octets}));
  v = hmac(k, v);
  k = hmac(k, cat({v, one, key.scalar, h_octets}));
  v = hmac(k, v);
  for (;;) {
    v = hmac(k, v);
    if (scalar_in_range(v)) return v;
    k = hmac(k, cat({v, zero}));
    v = hmac(k, v);
  }
}

}  // namespace detail

Signature sign_digest(const PrivateKey& key, const Digest& digest) {
  if (!scalar_in_range(key.scalar)) throw CryptoError("private scalar out of range");
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr d = bn_from(key.scalar);
  BnPtr e = bn_from(digest);
  BnPtr k = bn_from(detail::rfc6979_nonce(key, digest));
  PointPtr kg(EC_POINT_new(p256()));
  BnPtr x(BN_new());
  BnPtr r(BN_new());
  BnPtr s(BN_new());
  BnPtr kinv(BN_new());
  if (!ctx || !kg || !x || !r || !s || !kinv) throw CryptoError("allocation failed");

  if (!EC_POINT_mul(p256(), kg.get(), k.get(), nullptr, nullptr, ctx.get()) ||
      !EC_POINT_get_affine_coordinates(p256(), kg.get(), x.get(), nullptr, ctx.get()) ||
      !BN_nnmod(r.get(), x.get(), order(), ctx.get())) {
    throw CryptoError("ECDSA r computation failed");
  }
  // s = k^-1 (e + r d) mod n
  if (!BN_mod_inverse(kinv.get(), k.get(), order(), ctx.get()) ||
      !BN_mod_mul(s.get(), r.get(), d.get(), order(), ctx.get()) ||
      !BN_mod_add(s.get(), s.get(), e.get(), order(), ctx.get()) ||
      !BN_mod_mul(s.get(), s.get(), kinv.get(), order(), ctx.get())) {
    throw CryptoError("ECDSA s computation failed");
  }
  if (BN_is_zero(r.get()) || BN_is_zero(s.get())) {
    // Probability ~2^-256; RFC 6979 would continue the nonce loop here.
    throw CryptoError("degenerate ECDSA signature");
  }
  Signature out{};
  auto rb = bn_to<32>(r.get());
  auto sb = bn_to<32>(s.get());
  std::copy(rb.begin(), rb.end(), out.begin());
  std::copy(sb.begin(), sb.end(), out.begin() + 32);
  return out;
}

bool verify_digest(const PublicKey& key, const Digest& digest, const Signature& signature) {
  std::unique_ptr<OSSL_PARAM_BLD, ParamBldFree> bld(OSSL_PARAM_BLD_new());
  if (!bld) return false;
  if (!OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, SN_X9_62_prime256v1, 0) ||
      !OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, key.data(), key.size())) {
    return false;
  }
  std::unique_ptr<OSSL_PARAM, ParamFree> params(OSSL_PARAM_BLD_to_param(bld.get()));
  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree> from_ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
  if (!params || !from_ctx || EVP_PKEY_fromdata_init(from_ctx.get()) <= 0) return false;
  EVP_PKEY* raw = nullptr;
  if (EVP_PKEY_fromdata(from_ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) <= 0) return false;
  std::unique_ptr<EVP_PKEY, PkeyFree> pkey(raw);

  std::unique_ptr<ECDSA_SIG, SigFree> sig(ECDSA_SIG_new());
  BIGNUM* r = BN_bin2bn(signature.data(), 32, nullptr);
  BIGNUM* s = BN_bin2bn(signature.data() + 32, 32, nullptr);
  if (!sig || !r || !s || !ECDSA_SIG_set0(sig.get(), r, s)) {
    BN_free(r);
    BN_free(s);
    return false;
  }
  unsigned char* der = nullptr;
  int der_len = i2d_ECDSA_SIG(sig.get(), &der);
  if (der_len <= 0) return false;
  std::unique_ptr<unsigned char, OpenSslFree> der_guard(der);

  std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree> vctx(EVP_PKEY_CTX_new(pkey.get(), nullptr));
  if (!vctx || EVP_PKEY_verify_init(vctx.get()) <= 0) return false;
  return EVP_PKEY_verify(vctx.get(), der, static_cast<std::size_t>(der_len), digest.data(), digest.size()) == 1;
}

}  // namespace pncsim::pki
