// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/wire/messages.hpp"

#include "pncsim/wire/tlv.hpp"

namespace pncsim::wire {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint8_t tag_of(const V2gMessage& m) { return static_cast<std::uint8_t>(m.index() + 1); }

PaymentOption to_payment_option(std::uint8_t raw) {
  switch (raw) {
    case 0x00:
      return PaymentOption::ContractCertificate;
    case 0x01:
      return PaymentOption::ExternalPayment;
    default:
      throw CodecError(CodecError::Code::Malformed, "unknown payment option " + std::to_string(raw));
  }
}

AuthorizationCode to_authorization_code(std::uint8_t raw) {
  if (raw > static_cast<std::uint8_t>(AuthorizationCode::ChallengeMismatch)) {
    throw CodecError(CodecError::Code::Malformed, "unknown authorization code " + std::to_string(raw));
  }
  return static_cast<AuthorizationCode>(raw);
}

}  // namespace

std::string_view message_name(const V2gMessage& message) {
  static constexpr std::string_view kNames[] = {
      "SessionSetupReq",  "SessionSetupRes",  "ServiceDiscoveryReq",        "ServiceDiscoveryRes",
      "PaymentServiceSelectionReq", "PaymentServiceSelectionRes", "PaymentDetailsReq", "PaymentDetailsRes",
      "AuthorizationReq", "AuthorizationRes", "SessionStopReq",             "SessionStopRes",
  };
  return kNames[message.index()];
}

std::string_view payment_option_name(PaymentOption option) {
  return option == PaymentOption::ContractCertificate ? "ContractCertificate" : "ExternalPayment";
}

std::string_view authorization_code_name(AuthorizationCode code) {
  switch (code) {
    case AuthorizationCode::Accepted:
      return "Accepted";
    case AuthorizationCode::BadSignature:
      return "BadSignature";
    case AuthorizationCode::BindingMismatch:
      return "BindingMismatch";
    case AuthorizationCode::TimingExceeded:
      return "TimingExceeded";
    case AuthorizationCode::ChainInvalid:
      return "ChainInvalid";
    case AuthorizationCode::ChallengeMismatch:
      return "ChallengeMismatch";
  }
  return "Unknown";
}

bool is_request(const V2gMessage& message) { return message.index() % 2 == 0; }

Bytes encode_tlv(const V2gMessage& message) {
  TlvWriter w(tag_of(message));
  std::visit(Overloaded{
                 [&](const SessionSetupReq& m) { w.text(0x01, m.evcc_id); },
                 [&](const SessionSetupRes& m) { w.text(0x01, m.evse_id); },
                 [&](const ServiceDiscoveryReq&) {},
                 [&](const ServiceDiscoveryRes& m) {
                   std::vector<Bytes> options;
                   for (auto o : m.payment_options) options.push_back(Bytes{static_cast<std::uint8_t>(o)});
                   w.list(0x01, options);
                 },
                 [&](const PaymentServiceSelectionReq& m) { w.u8(0x01, static_cast<std::uint8_t>(m.selected)); },
                 [&](const PaymentServiceSelectionRes&) {},
                 [&](const PaymentDetailsReq& m) {
                   w.field(0x01, m.contract_cert);
                   w.list(0x02, m.chain);
                 },
                 [&](const PaymentDetailsRes& m) { w.field(0x01, m.challenge); },
                 [&](const AuthorizationReq& m) { w.field(0x01, m.signature); },
                 [&](const AuthorizationRes& m) { w.u8(0x01, static_cast<std::uint8_t>(m.decision)); },
                 [&](const SessionStopReq&) {},
                 [&](const SessionStopRes&) {},
             },
             message);
  return std::move(w).finish();
}

V2gMessage decode_tlv(ByteView bytes) {
  TlvReader r(bytes);
  V2gMessage out;
  switch (r.message_tag()) {
    case 0x01:
      out = SessionSetupReq{r.text(0x01)};
      break;
    case 0x02:
      out = SessionSetupRes{r.text(0x01)};
      break;
    case 0x03:
      out = ServiceDiscoveryReq{};
      break;
    case 0x04: {
      ServiceDiscoveryRes m;
      for (const auto& item : r.list(0x01)) {
        if (item.size() != 1) throw CodecError(CodecError::Code::Malformed, "payment option must be one byte");
        m.payment_options.push_back(to_payment_option(item[0]));
      }
      out = std::move(m);
      break;
    }
    case 0x05:
      out = PaymentServiceSelectionReq{to_payment_option(r.u8(0x01))};
      break;
    case 0x06:
      out = PaymentServiceSelectionRes{};
      break;
    case 0x07: {
      PaymentDetailsReq m;
      m.contract_cert = r.field(0x01);
      m.chain = r.list(0x02);
      out = std::move(m);
      break;
    }
    case 0x08:
      out = PaymentDetailsRes{r.fixed<kChallengeLength>(0x01)};
      break;
    case 0x09:
      out = AuthorizationReq{r.fixed<kSignatureLength>(0x01)};
      break;
    case 0x0A:
      out = AuthorizationRes{to_authorization_code(r.u8(0x01))};
      break;
    case 0x0B:
      out = SessionStopReq{};
      break;
    case 0x0C:
      out = SessionStopRes{};
      break;
    default:
      throw CodecError(CodecError::Code::Malformed, "unknown message tag " + std::to_string(r.message_tag()));
  }
  r.finish();
  return out;
}

}  // namespace pncsim::wire
