// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/actors/protocol.hpp"

#include <algorithm>

#include "pncsim/simnet/network.hpp"

namespace pncsim::actors {

namespace {

template <typename T>
constexpr std::size_t index_of() {
  return wire::V2gMessage(T{}).index();
}

int rank(Phase p) { return static_cast<int>(p); }

}  // namespace

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Idle:
      return "Idle";
    case Phase::SlacJoined:
      return "SlacJoined";
    case Phase::Discovered:
      return "Discovered";
    case Phase::Connected:
      return "Connected";
    case Phase::ServiceDiscovered:
      return "ServiceDiscovered";
    case Phase::PaymentSelected:
      return "PaymentSelected";
    case Phase::DetailsExchanged:
      return "DetailsExchanged";
    case Phase::Authorized:
      return "Authorized";
    case Phase::Rejected:
      return "Rejected";
    case Phase::Stopped:
      return "Stopped";
  }
  return "Unknown";
}

bool is_forward(Phase from, Phase to) {
  if (from == Phase::Stopped) return false;
  if (to == Phase::Stopped) return true;
  if (from == Phase::Authorized || from == Phase::Rejected) return false;
  // ExternalPayment skips DetailsExchanged.
  return rank(to) > rank(from) && !(to == Phase::Rejected && from == Phase::Authorized);
}

// ---------------------------------------------------------------- EVSE

EvseProtocol::EvseProtocol(std::vector<wire::PaymentOption> offered) : offered_(std::move(offered)) {}

void EvseProtocol::advance(Phase next) {
  if (is_forward(phase_, next)) phase_ = next;
}

Transition EvseProtocol::violate(Phase before, std::string why) {
  phase_ = Phase::Stopped;
  return Transition{false, before, phase_, std::move(why)};
}

Transition EvseProtocol::on_request(const wire::V2gMessage& request) {
  const Phase before = phase_;
  const std::string name(wire::message_name(request));
  auto ok = [&] { return Transition{true, before, phase_, {}}; };

  if (phase_ == Phase::Stopped) return Transition{false, before, phase_, name + " after session end"};
  if (!wire::is_request(request)) return violate(before, "unexpected " + name + " at a charging station");
  if (rank(phase_) < rank(Phase::Connected)) return violate(before, name + " before channel establishment");

  const auto idx = request.index();
  if (idx == index_of<wire::SessionStopReq>()) {
    if (!started_) return violate(before, name + " before SessionSetupReq");
    phase_ = Phase::Stopped;
    return ok();
  }
  if (idx == index_of<wire::SessionSetupReq>()) {
    if (phase_ != Phase::Connected || started_) return violate(before, name + " in " + std::string(phase_name(before)));
    started_ = true;
    return ok();
  }
  if (idx == index_of<wire::ServiceDiscoveryReq>()) {
    if (phase_ != Phase::Connected || !started_) {
      return violate(before, name + " in " + std::string(phase_name(before)));
    }
    phase_ = Phase::ServiceDiscovered;
    return ok();
  }
  if (idx == index_of<wire::PaymentServiceSelectionReq>()) {
    if (phase_ != Phase::ServiceDiscovered) return violate(before, name + " in " + std::string(phase_name(before)));
    auto option = std::get<wire::PaymentServiceSelectionReq>(request).selected;
    if (std::find(offered_.begin(), offered_.end(), option) == offered_.end()) {
      return violate(before, "selected payment option " + std::string(wire::payment_option_name(option)) +
                                 " was not offered");
    }
    selected_ = option;
    phase_ = Phase::PaymentSelected;
    return ok();
  }
  if (idx == index_of<wire::PaymentDetailsReq>()) {
    if (phase_ != Phase::PaymentSelected || selected_ != wire::PaymentOption::ContractCertificate) {
      return violate(before, name + " in " + std::string(phase_name(before)));
    }
    phase_ = Phase::DetailsExchanged;
    return ok();
  }
  if (idx == index_of<wire::AuthorizationReq>()) {
    if (phase_ != Phase::DetailsExchanged) return violate(before, name + " in " + std::string(phase_name(before)));
    // Phase moves once the verdict is known.
    return ok();
  }
  return violate(before, "unhandled " + name);
}

void EvseProtocol::decide(bool authorized) {
  const bool contract = phase_ == Phase::DetailsExchanged;
  const bool external = phase_ == Phase::PaymentSelected && selected_ == wire::PaymentOption::ExternalPayment;
  if (!contract && !external) return;
  phase_ = authorized ? Phase::Authorized : Phase::Rejected;
}

// ---------------------------------------------------------------- EVCC

void EvccProtocol::advance(Phase next) {
  if (is_forward(phase_, next)) phase_ = next;
}

void EvccProtocol::sent(const wire::V2gMessage& request) {
  // Request and response share adjacent variant slots.
  awaiting_ = request.index() + 1;
}

Transition EvccProtocol::violate(Phase before, std::string why) {
  phase_ = Phase::Stopped;
  awaiting_.reset();
  return Transition{false, before, phase_, std::move(why)};
}

Transition EvccProtocol::on_response(const wire::V2gMessage& response) {
  const Phase before = phase_;
  const std::string name(wire::message_name(response));
  if (phase_ == Phase::Stopped) return Transition{false, before, phase_, name + " after session end"};
  if (wire::is_request(response)) return violate(before, "unexpected " + name + " at a vehicle");
  if (!awaiting_ || *awaiting_ != response.index()) return violate(before, "unsolicited " + name);
  awaiting_.reset();

  const auto idx = response.index();
  if (idx == index_of<wire::SessionSetupRes>()) {
    started_ = true;
  } else if (idx == index_of<wire::ServiceDiscoveryRes>()) {
    phase_ = Phase::ServiceDiscovered;
  } else if (idx == index_of<wire::PaymentServiceSelectionRes>()) {
    phase_ = Phase::PaymentSelected;
  } else if (idx == index_of<wire::PaymentDetailsRes>()) {
    phase_ = Phase::DetailsExchanged;
  } else if (idx == index_of<wire::AuthorizationRes>()) {
    auto code = std::get<wire::AuthorizationRes>(response).decision;
    phase_ = code == wire::AuthorizationCode::Accepted ? Phase::Authorized : Phase::Rejected;
  } else if (idx == index_of<wire::SessionStopRes>()) {
    phase_ = Phase::Stopped;
  }
  return Transition{true, before, phase_, {}};
}

void EvccProtocol::authorize_externally() {
  if (phase_ == Phase::PaymentSelected) phase_ = Phase::Authorized;
}

// ---------------------------------------------------------------- SDP guard

std::string_view flag_name(DetectorFlag flag) {
  switch (flag) {
    case DetectorFlag::SdpMultiResponse:
      return "SdpMultiResponse";
    case DetectorFlag::MacIpMismatch:
      return "MacIpMismatch";
    case DetectorFlag::TimingExceeded:
      return "TimingExceeded";
    case DetectorFlag::GeoMismatch:
      return "GeoMismatch";
  }
  return "Unknown";
}

SdpVerdict sdp_guard(SdpGuardState& state, const SdpObservation& incoming, const SdpHardening& hardening) {
  const bool new_responder =
      std::none_of(state.seen.begin(), state.seen.end(),
                   [&](const SdpObservation& o) { return o.src_mac == incoming.src_mac; });
  const bool had_other = !state.seen.empty() && new_responder;
  state.seen.push_back(incoming);

  if (hardening.mac_ip_consistency) {
    const bool ip_matches = incoming.src_ipv6 == simnet::eui64_ipv6(incoming.src_mac);
    const bool slac_matches = !state.slac_peer || *state.slac_peer == incoming.src_mac;
    if (!ip_matches || !slac_matches) return SdpVerdict{true, DetectorFlag::MacIpMismatch};
  }
  if (hardening.multi_response_abort && had_other) return SdpVerdict{true, DetectorFlag::SdpMultiResponse};
  return SdpVerdict{};
}

}  // namespace pncsim::actors
