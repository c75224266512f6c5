// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pncsim/bytes.hpp"
#include "pncsim/pki/certificate.hpp"

namespace pncsim::pki {

class PkiError : public std::runtime_error {
 public:
  enum class Code { RoleMismatch, GeoNotAllowed, InvalidValidity };
  PkiError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct Validity {
  std::int64_t not_before = 0;
  std::int64_t not_after = 0;
};

/// A certificate authority: its certificate, signing key and serial counter.
struct Authority {
  Certificate certificate;
  PrivateKey private_key;
  /// Certificates above this authority, root excluded (empty for a root).
  std::vector<Certificate> chain;
  std::uint64_t next_serial = 1;
};

/// Root ⇒ no parent, self-signed. IntermediateCA ⇒ parent required, signed by
/// the parent. Anything else is RoleMismatch.
Authority generate_authority(const std::string& name, Role role, Authority* parent, Validity validity,
                             DeterministicRng& rng);

/// Issues a leaf. `geo` is only accepted for StationLeaf (GeoNotAllowed
/// otherwise); non-leaf roles are RoleMismatch.
Credential issue_leaf(Authority& authority, const std::string& subject_id, Role role, Validity validity,
                      std::optional<GeoPoint> geo, DeterministicRng& rng);

/// Signs `cert` in place with `issuer_key` (tests use this to forge).
void sign_certificate(Certificate& cert, const PrivateKey& issuer_key);
bool verify_certificate_signature(const Certificate& cert, const PublicKey& issuer_key);

enum class ChainError { Ok, Expired, BadSignature, UnknownRoot, Revoked, RoleMismatch };

std::string_view chain_error_name(ChainError error);

struct ChainResult {
  ChainError error = ChainError::Ok;
  std::string subject;  // failing certificate, empty when Ok
  bool ok() const { return error == ChainError::Ok; }
};

inline constexpr std::size_t kMaxChainDepth = 8;

/// Walks issuer links from `leaf` until a certificate byte-identical to one
/// of `trust_roots` is reached. For each certificate on the path, checks in
/// order: issuer signature (UnknownRoot when no issuer by that name exists),
/// revocation, validity window, and role placement. The order of
/// `intermediates` does not matter.
ChainResult verify_chain(const Certificate& leaf, std::span<const Certificate> intermediates,
                         std::span<const Certificate> trust_roots, std::int64_t now,
                         const std::optional<RevocationList>& crl = std::nullopt);

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

/// Haversine great-circle distance in meters.
double geo_distance(const GeoPoint& a, const GeoPoint& b);

/// The point `meters` due north of `origin` along its meridian.
GeoPoint offset_north(const GeoPoint& origin, double meters);

enum class GeoCheck { Ok, GeoMismatch, NoGeoExtension };

std::string_view geo_check_name(GeoCheck check);

GeoCheck check_geo_binding(const Certificate& cert, const GeoPoint& vehicle_position, double threshold_m);

}  // namespace pncsim::pki
