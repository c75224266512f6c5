// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pncsim/bytes.hpp"
#include "pncsim/pki/crypto.hpp"

namespace pncsim::pki {

enum class Role : std::uint8_t {
  Root = 0x01,
  IntermediateCA = 0x02,
  StationLeaf = 0x03,
  ContractLeaf = 0x04,
  VehicleLeaf = 0x05,
};

std::string_view role_name(Role role);
bool is_authority_role(Role role);

struct GeoPoint {
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& point);

/// Simplified certificate. The signature covers the canonical TLV encoding
/// of every other field (see tbs_bytes).
struct Certificate {
  std::uint64_t serial = 0;
  std::string subject_id;
  Role role = Role::Root;
  PublicKey public_key{};
  std::int64_t not_before = 0;  // seconds since epoch
  std::int64_t not_after = 0;
  std::optional<GeoPoint> geo;  // station certificates only
  std::string issuer_id;
  Signature signature{};

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

Bytes tbs_bytes(const Certificate& cert);
Bytes encode_certificate(const Certificate& cert);
/// Throws wire::CodecError{Malformed} on structural or range violations.
Certificate decode_certificate(ByteView bytes);

struct Credential {
  Certificate certificate;
  PrivateKey private_key;
  /// Issuing CAs from the leaf's issuer upwards, root excluded.
  std::vector<Certificate> chain;
};

/// Pairs a contract certificate with its private key.
using ContractCredential = Credential;

bool key_matches(const Credential& credential);

struct RevocationList {
  std::string issuer_id;
  std::set<std::string> revoked;
  std::int64_t issued_at = 0;

  bool contains(std::string_view subject_id) const { return revoked.count(std::string(subject_id)) != 0; }
  friend bool operator==(const RevocationList&, const RevocationList&) = default;
};

Bytes encode_crl(const RevocationList& crl);
RevocationList decode_crl(ByteView bytes);

}  // namespace pncsim::pki
