// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/pnc/authorization.hpp"

namespace pncsim::pnc {

Challenge generate_challenge(DeterministicRng& rng, const SessionId& session_id, Nanos now) {
  Challenge c;
  c.bytes = rng.bytes<wire::kChallengeLength>();
  c.issued_at = now;
  c.session_id = session_id;
  return c;
}

std::string describe(const AuthorizationPolicy& policy) {
  std::string out = policy.binding == Binding::StationIdBound ? "station-bound" : "none";
  if (policy.timing_threshold) out += "+timing:" + std::to_string(*policy.timing_threshold / kMillisecond) + "ms";
  return out;
}

pki::Digest signing_digest(const ChallengeBytes& challenge, std::optional<std::string_view> station_id) {
  Bytes input(challenge.begin(), challenge.end());
  if (station_id) {
    input.push_back(kBindingSeparator);
    input.insert(input.end(), station_id->begin(), station_id->end());
  }
  return pki::sha256(input);
}

pki::Signature sign_challenge(const pki::Credential& credential, const Challenge& challenge,
                              std::optional<std::string_view> station_id) {
  return pki::sign_digest(credential.private_key, signing_digest(challenge.bytes, station_id));
}

std::string AuthorizationDecision::describe() const {
  std::string out(wire::authorization_code_name(code));
  if (code == AuthorizationCode::ChainInvalid) {
    out += "(" + std::string(pki::chain_error_name(chain.error)) + " " + chain.subject + ")";
  }
  return out;
}

AuthorizationDecision verify_authorization(const pki::Certificate& contract_cert,
                                           std::span<const pki::Certificate> chain, const Challenge& issued,
                                           const Challenge& presented, const pki::Signature& signature,
                                           const VerifierContext& context, Nanos t_sent, Nanos t_received) {
  AuthorizationDecision d;
  d.measured_latency = t_received - t_sent;
  if (presented.bytes != issued.bytes || presented.session_id != issued.session_id) {
    d.code = AuthorizationCode::ChallengeMismatch;
    return d;
  }

  d.chain = pki::verify_chain(contract_cert, chain, context.trust_roots, context.now_seconds, context.crl);
  if (d.chain.ok() && contract_cert.role != pki::Role::ContractLeaf) {
    d.chain = pki::ChainResult{pki::ChainError::RoleMismatch, contract_cert.subject_id};
  }
  if (!d.chain.ok()) {
    d.code = AuthorizationCode::ChainInvalid;
    return d;
  }

  const bool bound = context.policy.binding == Binding::StationIdBound;
  auto digest = signing_digest(issued.bytes, bound ? std::optional<std::string_view>(context.station_id)
                                                   : std::nullopt);
  if (!pki::verify_digest(contract_cert.public_key, digest, signature)) {
    d.code = bound ? AuthorizationCode::BindingMismatch : AuthorizationCode::BadSignature;
    return d;
  }

  if (context.policy.timing_threshold && d.measured_latency > *context.policy.timing_threshold) {
    d.code = AuthorizationCode::TimingExceeded;
    return d;
  }
  return d;
}

}  // namespace pncsim::pnc
