// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/pki/authority.hpp"

#include <cmath>
#include <numbers>

namespace pncsim::pki {

namespace {

void check_validity(const Validity& v) {
  if (v.not_before >= v.not_after) {
    throw PkiError(PkiError::Code::InvalidValidity, "not_before must precede not_after");
  }
}

bool is_trusted(const Certificate& cert, std::span<const Certificate> trust_roots) {
  for (const auto& root : trust_roots) {
    if (root == cert) return true;
  }
  return false;
}

}  // namespace

void sign_certificate(Certificate& cert, const PrivateKey& issuer_key) {
  cert.signature = sign_digest(issuer_key, sha256(tbs_bytes(cert)));
}

bool verify_certificate_signature(const Certificate& cert, const PublicKey& issuer_key) {
  return verify_digest(issuer_key, sha256(tbs_bytes(cert)), cert.signature);
}

Authority generate_authority(const std::string& name, Role role, Authority* parent, Validity validity,
                             DeterministicRng& rng) {
  if (role == Role::Root && parent != nullptr) {
    throw PkiError(PkiError::Code::RoleMismatch, "a root has no parent");
  }
  if (role == Role::IntermediateCA && parent == nullptr) {
    throw PkiError(PkiError::Code::RoleMismatch, "an intermediate needs a parent authority");
  }
  if (!is_authority_role(role)) {
    throw PkiError(PkiError::Code::RoleMismatch, std::string(role_name(role)) + " cannot be an authority");
  }
  check_validity(validity);

  KeyPair keys = derive_keypair(rng);
  Authority auth;
  auth.private_key = keys.private_key;
  Certificate& cert = auth.certificate;
  cert.subject_id = name;
  cert.role = role;
  cert.public_key = keys.public_key;
  cert.not_before = validity.not_before;
  cert.not_after = validity.not_after;
  if (parent == nullptr) {
    cert.serial = 0;
    cert.issuer_id = name;
    sign_certificate(cert, keys.private_key);
  } else {
    cert.serial = parent->next_serial++;
    cert.issuer_id = parent->certificate.subject_id;
    sign_certificate(cert, parent->private_key);
    if (parent->certificate.role == Role::IntermediateCA) {
      auth.chain.push_back(parent->certificate);
    }
    auth.chain.insert(auth.chain.end(), parent->chain.begin(), parent->chain.end());
  }
  return auth;
}

Credential issue_leaf(Authority& authority, const std::string& subject_id, Role role, Validity validity,
                      std::optional<GeoPoint> geo, DeterministicRng& rng) {
  if (is_authority_role(role) || !is_authority_role(authority.certificate.role)) {
    throw PkiError(PkiError::Code::RoleMismatch, "issue_leaf needs a leaf role and an authority issuer");
  }
  if (geo && role != Role::StationLeaf) {
    throw PkiError(PkiError::Code::GeoNotAllowed, "geo extension only allowed on station certificates");
  }
  if (geo && !is_valid(*geo)) {
    throw PkiError(PkiError::Code::GeoNotAllowed, "geo coordinates out of range");
  }
  check_validity(validity);

  KeyPair keys = derive_keypair(rng);
  Credential cred;
  cred.private_key = keys.private_key;
  Certificate& cert = cred.certificate;
  cert.serial = authority.next_serial++;
  cert.subject_id = subject_id;
  cert.role = role;
  cert.public_key = keys.public_key;
  cert.not_before = validity.not_before;
  cert.not_after = validity.not_after;
  cert.geo = geo;
  cert.issuer_id = authority.certificate.subject_id;
  sign_certificate(cert, authority.private_key);

  if (authority.certificate.role == Role::IntermediateCA) {
    cred.chain.push_back(authority.certificate);
  }
  cred.chain.insert(cred.chain.end(), authority.chain.begin(), authority.chain.end());
  return cred;
}

std::string_view chain_error_name(ChainError error) {
  switch (error) {
    case ChainError::Ok:
      return "Ok";
    case ChainError::Expired:
      return "Expired";
    case ChainError::BadSignature:
      return "BadSignature";
    case ChainError::UnknownRoot:
      return "UnknownRoot";
    case ChainError::Revoked:
      return "Revoked";
    case ChainError::RoleMismatch:
      return "RoleMismatch";
  }
  return "Unknown";
}

ChainResult verify_chain(const Certificate& leaf, std::span<const Certificate> intermediates,
                         std::span<const Certificate> trust_roots, std::int64_t now,
                         const std::optional<RevocationList>& crl) {
  const Certificate* cur = &leaf;
  for (std::size_t depth = 0;; ++depth) {
    auto fail = [&](ChainError e) { return ChainResult{e, cur->subject_id}; };
    if (depth > kMaxChainDepth) return fail(ChainError::RoleMismatch);

    const bool anchor = is_trusted(*cur, trust_roots);
    const Certificate* issuer = nullptr;
    if (anchor || cur->role == Role::Root) {
      if (!verify_certificate_signature(*cur, cur->public_key)) return fail(ChainError::BadSignature);
      if (!anchor) return fail(ChainError::UnknownRoot);
    } else {
      bool named = false;
      auto try_pool = [&](std::span<const Certificate> pool) {
        for (const auto& candidate : pool) {
          if (candidate.subject_id != cur->issuer_id) continue;
          named = true;
          if (verify_certificate_signature(*cur, candidate.public_key)) {
            issuer = &candidate;
            return;
          }
        }
      };
      try_pool(trust_roots);
      if (issuer == nullptr) try_pool(intermediates);
      if (!named) return fail(ChainError::UnknownRoot);
      if (issuer == nullptr) return fail(ChainError::BadSignature);
    }

    if (crl && crl->contains(cur->subject_id)) return fail(ChainError::Revoked);
    if (now < cur->not_before || now > cur->not_after) return fail(ChainError::Expired);
    if (cur->geo && cur->role != Role::StationLeaf) return fail(ChainError::RoleMismatch);
    if (depth > 0 && !is_authority_role(cur->role)) return fail(ChainError::RoleMismatch);
    if (anchor && cur->role != Role::Root) return fail(ChainError::RoleMismatch);

    if (anchor) return ChainResult{};
    cur = issuer;
  }
}

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double phi1 = a.latitude * kDeg;
  const double phi2 = b.latitude * kDeg;
  const double dphi = (b.latitude - a.latitude) * kDeg;
  const double dlambda = (b.longitude - a.longitude) * kDeg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

GeoPoint offset_north(const GeoPoint& origin, double meters) {
  return GeoPoint{origin.latitude + meters / kEarthRadiusMeters * 180.0 / std::numbers::pi, origin.longitude};
}

std::string_view geo_check_name(GeoCheck check) {
  switch (check) {
    case GeoCheck::Ok:
      return "Ok";
    case GeoCheck::GeoMismatch:
      return "GeoMismatch";
    case GeoCheck::NoGeoExtension:
      return "NoGeoExtension";
  }
  return "Unknown";
}

GeoCheck check_geo_binding(const Certificate& cert, const GeoPoint& vehicle_position, double threshold_m) {
  if (!cert.geo) return GeoCheck::NoGeoExtension;
  return geo_distance(*cert.geo, vehicle_position) <= threshold_m ? GeoCheck::Ok : GeoCheck::GeoMismatch;
}

}  // namespace pncsim::pki
