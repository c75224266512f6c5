// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pncsim/bytes.hpp"
#include "pncsim/channel/handshake.hpp"
#include "pncsim/pki/authority.hpp"
#include "pncsim/wire/messages.hpp"

namespace pncsim::pnc {

using channel::SessionId;
using wire::AuthorizationCode;
using wire::ChallengeBytes;

struct Challenge {
  ChallengeBytes bytes{};
  Nanos issued_at = 0;
  SessionId session_id{};
  friend bool operator==(const Challenge&, const Challenge&) = default;
};

/// Draws wire::kChallengeLength fresh bytes from the scenario RNG.
Challenge generate_challenge(DeterministicRng& rng, const SessionId& session_id, Nanos now);

/// Separator between challenge and station identifier in bound signatures.
inline constexpr std::uint8_t kBindingSeparator = 0x1F;

enum class Binding { None, StationIdBound };

struct AuthorizationPolicy {
  Binding binding = Binding::None;
  std::optional<Nanos> timing_threshold;
  friend bool operator==(const AuthorizationPolicy&, const AuthorizationPolicy&) = default;
};

std::string describe(const AuthorizationPolicy& policy);

/// SHA-256(challenge) or SHA-256(challenge || 0x1F || station_id).
pki::Digest signing_digest(const ChallengeBytes& challenge, std::optional<std::string_view> station_id);

pki::Signature sign_challenge(const pki::Credential& credential, const Challenge& challenge,
                              std::optional<std::string_view> station_id);

struct AuthorizationDecision {
  AuthorizationCode code = AuthorizationCode::Accepted;
  pki::ChainResult chain;  // populated when code is ChainInvalid
  Nanos measured_latency = 0;

  bool accepted() const { return code == AuthorizationCode::Accepted; }
  std::string describe() const;
};

/// Verifier-side context owned by the charging station.
struct VerifierContext {
  std::vector<pki::Certificate> trust_roots;  // contract PKI anchors
  std::optional<pki::RevocationList> crl;
  std::int64_t now_seconds = 0;
  AuthorizationPolicy policy;
  std::string station_id;  // expected binding under StationIdBound
};

/// First failing check wins: ChallengeMismatch, then chain, then signature
/// (BindingMismatch instead of BadSignature under StationIdBound), then the
/// timing guard on t_received - t_sent.
AuthorizationDecision verify_authorization(const pki::Certificate& contract_cert,
                                           std::span<const pki::Certificate> chain, const Challenge& issued,
                                           const Challenge& presented, const pki::Signature& signature,
                                           const VerifierContext& context, Nanos t_sent, Nanos t_received);

}  // namespace pncsim::pnc
