// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "pncsim/bytes.hpp"

namespace pncsim::pki {

/// SEC1 compressed P-256 point.
using PublicKey = std::array<std::uint8_t, 33>;
/// Raw r || s, 32 bytes each, big-endian.
using Signature = std::array<std::uint8_t, 64>;
using Digest = std::array<std::uint8_t, 32>;

struct PrivateKey {
  std::array<std::uint8_t, 32> scalar{};
  friend bool operator==(const PrivateKey&, const PrivateKey&) = default;
};

struct KeyPair {
  PrivateKey private_key;
  PublicKey public_key{};
};

class CryptoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Digest sha256(ByteView data);

/// Draws 32-byte candidates from `rng` until one lies in [1, n-1].
KeyPair derive_keypair(DeterministicRng& rng);

/// Throws CryptoError when the scalar is zero or not below the group order.
PublicKey public_key_of(const PrivateKey& key);

bool is_valid_public_key(const PublicKey& key);

/// ECDSA P-256 over a precomputed SHA-256 digest. The nonce follows the
/// deterministic construction of RFC 6979 (HMAC-SHA-256), so equal inputs
/// give equal signatures and scenario transcripts stay reproducible.
Signature sign_digest(const PrivateKey& key, const Digest& digest);

/// Verification goes through OpenSSL's own ECDSA implementation, which
/// keeps it independent of the signing arithmetic above.
bool verify_digest(const PublicKey& key, const Digest& digest, const Signature& signature);

namespace detail {
/// RFC 6979 section 3.2 nonce for P-256 / SHA-256.
std::array<std::uint8_t, 32> rfc6979_nonce(const PrivateKey& key, const Digest& digest);
}  // namespace detail

}  // namespace pncsim::pki
