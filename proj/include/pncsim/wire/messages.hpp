// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pncsim/bytes.hpp"

namespace pncsim::wire {

enum class PaymentOption : std::uint8_t {
  ContractCertificate = 0x00,
  ExternalPayment = 0x01,
};

/// Result code carried in AuthorizationRes.
enum class AuthorizationCode : std::uint8_t {
  Accepted = 0x00,
  BadSignature = 0x01,
  BindingMismatch = 0x02,
  TimingExceeded = 0x03,
  ChainInvalid = 0x04,
  ChallengeMismatch = 0x05,
};

inline constexpr std::size_t kChallengeLength = 16;
inline constexpr std::size_t kSignatureLength = 64;

using ChallengeBytes = std::array<std::uint8_t, kChallengeLength>;
using SignatureBytes = std::array<std::uint8_t, kSignatureLength>;

struct SessionSetupReq {
  std::string evcc_id;
  friend bool operator==(const SessionSetupReq&, const SessionSetupReq&) = default;
};
struct SessionSetupRes {
  std::string evse_id;
  friend bool operator==(const SessionSetupRes&, const SessionSetupRes&) = default;
};
struct ServiceDiscoveryReq {
  friend bool operator==(const ServiceDiscoveryReq&, const ServiceDiscoveryReq&) = default;
};
struct ServiceDiscoveryRes {
  std::vector<PaymentOption> payment_options;
  friend bool operator==(const ServiceDiscoveryRes&, const ServiceDiscoveryRes&) = default;
};
struct PaymentServiceSelectionReq {
  PaymentOption selected = PaymentOption::ExternalPayment;
  friend bool operator==(const PaymentServiceSelectionReq&, const PaymentServiceSelectionReq&) = default;
};
struct PaymentServiceSelectionRes {
  friend bool operator==(const PaymentServiceSelectionRes&, const PaymentServiceSelectionRes&) = default;
};
struct PaymentDetailsReq {
  Bytes contract_cert;
  std::vector<Bytes> chain;
  friend bool operator==(const PaymentDetailsReq&, const PaymentDetailsReq&) = default;
};
struct PaymentDetailsRes {
  ChallengeBytes challenge{};
  friend bool operator==(const PaymentDetailsRes&, const PaymentDetailsRes&) = default;
};
struct AuthorizationReq {
  SignatureBytes signature{};
  friend bool operator==(const AuthorizationReq&, const AuthorizationReq&) = default;
};
struct AuthorizationRes {
  AuthorizationCode decision = AuthorizationCode::Accepted;
  friend bool operator==(const AuthorizationRes&, const AuthorizationRes&) = default;
};
struct SessionStopReq {
  friend bool operator==(const SessionStopReq&, const SessionStopReq&) = default;
};
struct SessionStopRes {
  friend bool operator==(const SessionStopRes&, const SessionStopRes&) = default;
};

/// Variant index + 1 is the message tag on the wire.
using V2gMessage = std::variant<SessionSetupReq, SessionSetupRes, ServiceDiscoveryReq, ServiceDiscoveryRes,
                                PaymentServiceSelectionReq, PaymentServiceSelectionRes, PaymentDetailsReq,
                                PaymentDetailsRes, AuthorizationReq, AuthorizationRes, SessionStopReq,
                                SessionStopRes>;

inline constexpr std::size_t kMessageKinds = std::variant_size_v<V2gMessage>;

std::string_view message_name(const V2gMessage& message);
std::string_view payment_option_name(PaymentOption option);
std::string_view authorization_code_name(AuthorizationCode code);

/// True for the *Req half of each pair.
bool is_request(const V2gMessage& message);

/// Throws CodecError{FieldTooLong} when a field exceeds 65535 bytes.
Bytes encode_tlv(const V2gMessage& message);

/// Throws CodecError{Malformed} on unknown tags, truncation, trailing bytes
/// or out-of-range enumerators.
V2gMessage decode_tlv(ByteView bytes);

}  // namespace pncsim::wire
