// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pncsim/bytes.hpp"
#include "pncsim/wire/messages.hpp"
#include "pncsim/wire/v2gtp.hpp"

namespace pncsim::actors {

enum class Phase {
  Idle,
  SlacJoined,
  Discovered,
  Connected,
  ServiceDiscovered,
  PaymentSelected,
  DetailsExchanged,
  Authorized,
  Rejected,
  Stopped,
};

std::string_view phase_name(Phase phase);

/// Legal successor in the session order; Authorized and Rejected are
/// alternatives, and any phase may end in Stopped.
bool is_forward(Phase from, Phase to);

/// Result of offering a message to a protocol state machine.
struct Transition {
  bool legal = false;
  Phase before = Phase::Idle;
  Phase after = Phase::Idle;
  std::string violation;  // set when !legal
};

/// Charging-station view of the application session. Requests are legal
/// only in their phase; anything else is a protocol violation that ends the
/// session in Stopped.
class EvseProtocol {
 public:
  explicit EvseProtocol(std::vector<wire::PaymentOption> offered = {wire::PaymentOption::ContractCertificate,
                                                                      wire::PaymentOption::ExternalPayment});

  Phase phase() const { return phase_; }
  bool session_started() const { return started_; }
  std::optional<wire::PaymentOption> selected() const { return selected_; }
  const std::vector<wire::PaymentOption>& offered() const { return offered_; }

  /// Lower-layer progress (SLAC, SDP, channel establishment).
  void advance(Phase next);

  Transition on_request(const wire::V2gMessage& request);

  /// Outcome of AuthorizationReq processing, or of an external/backend
  /// authorization while PaymentSelected with ExternalPayment.
  void decide(bool authorized);
  void stop() { phase_ = Phase::Stopped; }

 private:
  Transition violate(Phase before, std::string why);

  std::vector<wire::PaymentOption> offered_;
  Phase phase_ = Phase::Idle;
  bool started_ = false;
  std::optional<wire::PaymentOption> selected_;
};

/// Vehicle view: a response is legal only if it answers the request that
/// is outstanding.
class EvccProtocol {
 public:
  Phase phase() const { return phase_; }
  bool session_started() const { return started_; }
  /// Variant index of the response currently expected, if any.
  std::optional<std::size_t> awaiting() const { return awaiting_; }

  void advance(Phase next);

  /// Records an outgoing request; only one may be outstanding.
  void sent(const wire::V2gMessage& request);

  Transition on_response(const wire::V2gMessage& response);

  /// Authorized without a signature exchange (external or backend).
  void authorize_externally();
  void stop() {
    phase_ = Phase::Stopped;
    awaiting_.reset();
  }

 private:
  Transition violate(Phase before, std::string why);

  Phase phase_ = Phase::Idle;
  bool started_ = false;
  std::optional<std::size_t> awaiting_;
};

// ---------------------------------------------------------------- SDP guard

struct SdpHardening {
  bool multi_response_abort = false;
  bool mac_ip_consistency = false;
  friend bool operator==(const SdpHardening&, const SdpHardening&) = default;
};

enum class DetectorFlag { SdpMultiResponse, MacIpMismatch, TimingExceeded, GeoMismatch };

std::string_view flag_name(DetectorFlag flag);

struct SdpObservation {
  Mac src_mac{};
  Ipv6 src_ipv6{};
  wire::SdpResponse response;
};

struct SdpGuardState {
  std::optional<Mac> slac_peer;  // MAC that sent the SLAC match
  std::vector<SdpObservation> seen;
};

struct SdpVerdict {
  bool abort = false;
  std::optional<DetectorFlag> cause;
};

/// Records the response in `state` and decides whether the vehicle may keep
/// talking to the responder.
SdpVerdict sdp_guard(SdpGuardState& state, const SdpObservation& incoming, const SdpHardening& hardening);

}  // namespace pncsim::actors
