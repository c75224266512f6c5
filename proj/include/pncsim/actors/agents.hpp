// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pncsim/actors/backend.hpp"
#include "pncsim/actors/protocol.hpp"
#include "pncsim/actors/relay.hpp"
#include "pncsim/channel/handshake.hpp"
#include "pncsim/pnc/authorization.hpp"
#include "pncsim/simnet/network.hpp"

namespace pncsim::actors {

/// Shared by all agents of one scenario run.
struct Context {
  simnet::Network& network;
  std::int64_t epoch = 0;  // wall-clock seconds at virtual time zero
  std::vector<std::string> keylog;
};

struct SdpSeen {
  Mac mac{};
  std::uint16_t port = 0;
};

/// Per-actor end state, including collected evidence.
struct SessionReport {
  std::string actor;
  std::string role;
  Phase phase = Phase::Idle;
  std::optional<wire::AuthorizationCode> decision;
  std::string authorized_by;  // "contract", "external" or "backend"
  std::string stop_cause;
  std::string peer_station_id;
  std::string selected_peer;  // vehicles: name of the SDP responder used
  std::optional<std::string> billed_to;
  std::optional<wire::ChallengeBytes> challenge;  // issued (stations) or received (vehicles)
  std::vector<std::pair<Phase, Nanos>> phase_times;
  std::vector<SdpSeen> sdp_responses;
  bool joined = false;
};

class Agent {
 public:
  Agent(Context& ctx, std::string name, std::string role, const Mac& mac, int segment);
  virtual ~Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const std::string& name() const { return report_.actor; }
  simnet::NodeId node() const { return node_; }
  const Mac& mac() const { return mac_; }
  const SessionReport& report() const { return report_; }

  virtual void start() {}

 protected:
  virtual void on_frame(const simnet::Frame& frame) = 0;

  simnet::Network& net() { return ctx_.network; }
  std::int64_t wall_seconds() const { return ctx_.epoch + ctx_.network.now() / kSecond; }

  /// Records a PhaseChange when `phase` differs from the last recorded one.
  void note_phase(Phase phase, const std::string& cause = {});
  void decision(nlohmann::ordered_json detail);
  void raise_flag(DetectorFlag flag, nlohmann::ordered_json detail = {});
  void on_slac_match(const simnet::Frame& frame);

  void send_v2g(const Mac& dst, std::uint16_t port, const wire::V2gMessage& message);
  void send_handshake(const Mac& dst, std::uint16_t port, const Bytes& record);

  simnet::TimerId arm(Nanos delay, std::function<void()> fire);
  void disarm(std::optional<simnet::TimerId>& timer);

  Context& ctx_;
  SessionReport report_;
  simnet::NodeId node_;
  Mac mac_;
  Phase recorded_ = Phase::Idle;
};

// ---------------------------------------------------------------- vehicle

struct EvccSettings {
  std::string evcc_id;
  channel::ChannelConfig channel;  // mode, station trust roots, geo policy, vehicle credential
  std::optional<pki::Credential> contract;
  pnc::Binding binding = pnc::Binding::None;
  std::optional<std::string> oob_token;
  SdpHardening hardening;
  Nanos response_timeout = 2 * kSecond;
  Nanos payment_details_timeout = 5 * kSecond;
  Nanos sdp_window = 20 * kMillisecond;
  Nanos oob_latency = 50 * kMillisecond;
};

class Evcc : public Agent {
 public:
  Evcc(Context& ctx, std::string name, const Mac& mac, int segment, EvccSettings settings,
       OobBackend* backend = nullptr, std::string role = "evcc");

  const EvccProtocol& protocol() const { return proto_; }

 protected:
  void on_frame(const simnet::Frame& frame) override;

  virtual bool wants_contract_payment() const;
  virtual void send_payment_details();
  virtual void on_payment_details_res(const wire::PaymentDetailsRes& res);

  void send_request(const wire::V2gMessage& request);
  void abort(const std::string& cause);
  /// Cancels all pending timers of this vehicle.
  void quiesce();

  EvccSettings settings_;
  OobBackend* backend_;
  EvccProtocol proto_;
  channel::Channel channel_;
  Mac peer_mac_{};
  std::uint16_t peer_port_ = 0;
  std::optional<simnet::TimerId> timeout_;

 private:
  void on_sdp_response(const simnet::Frame& frame, ByteView payload);
  void connect(const SdpObservation& chosen);
  void on_handshake_record(ByteView record);
  void on_v2g(const wire::V2gMessage& message);
  void choose_payment(const wire::ServiceDiscoveryRes& res);
  void request_backend_start();

  SdpGuardState sdp_;
  std::optional<simnet::TimerId> sdp_window_timer_;
  bool sdp_decided_ = false;
  std::optional<channel::ClientHandshake> handshake_;
  std::optional<wire::PaymentOption> chosen_;
};

/// Attacker vehicle at the regular station: replays the victim's contract
/// certificate and signature received over the relay.
class RelayEvcc : public Evcc {
 public:
  RelayEvcc(Context& ctx, std::string name, const Mac& mac, int segment, EvccSettings settings,
            RelayChannel& relay, Nanos relay_timeout);

  void start() override;

 protected:
  bool wants_contract_payment() const override { return true; }
  void send_payment_details() override;
  void on_payment_details_res(const wire::PaymentDetailsRes& res) override;

 private:
  void on_relay(const RelayItem& item);
  void pump();

  RelayChannel& relay_;
  Nanos relay_timeout_;
  std::optional<RelayCert> cert_;
  std::optional<RelaySignature> signature_;
  bool want_cert_ = false;
  bool want_signature_ = false;
  std::optional<simnet::TimerId> relay_timer_;
};

// ---------------------------------------------------------------- station

struct EvseSettings {
  channel::ChannelConfig channel;  // server credential, mode, vehicle trust roots
  std::vector<wire::PaymentOption> offered{wire::PaymentOption::ContractCertificate,
                                           wire::PaymentOption::ExternalPayment};
  pnc::VerifierContext verifier;  // contract roots and policy; station_id filled in
  bool awaits_backend = false;    // ExternalPayment authorizes on a remote start
  bool performs_slac = true;
  std::uint16_t port = 50000;
  Nanos sequence_timeout = 60 * kSecond;
};

class Evse : public Agent {
 public:
  Evse(Context& ctx, std::string name, const Mac& mac, int segment, EvseSettings settings,
       std::string role = "evse");

  void start() override;
  const std::string& station_id() const { return station_id_; }
  const EvseProtocol& protocol() const { return proto_; }

  /// Broadcasts the SLAC match confirmation carrying fresh NMK and NID.
  void slac_broadcast();
  void remote_start(const std::string& contract_id);

 protected:
  void on_frame(const simnet::Frame& frame) override;

  virtual void on_payment_details(const wire::PaymentDetailsReq& req);
  virtual void on_authorization(const wire::AuthorizationReq& req);

  void reply(const wire::V2gMessage& message);
  void finish(const std::string& cause);
  void rearm_sequence_timer();

  EvseSettings settings_;
  std::string station_id_;
  EvseProtocol proto_;
  std::optional<channel::ServerHandshake> handshake_;
  channel::Channel channel_;
  std::optional<Mac> peer_;
  std::optional<pnc::Challenge> issued_;
  Nanos t_sent_ = 0;
  pki::Certificate contract_cert_;
  std::vector<pki::Certificate> contract_chain_;
  bool details_valid_ = false;
  std::optional<simnet::TimerId> sequence_timer_;
  bool silent_ = false;

 private:
  void on_sdp_request(const simnet::Frame& frame);
  void on_handshake_record(const simnet::Frame& frame, ByteView record);
  void on_v2g(const wire::V2gMessage& message);
};

/// Attacker-built station facing the victim. Presents a compromised but
/// valid station credential, forwards certificate and signature over the
/// relay and answers with the regular station's challenge.
class FakeEvse : public Evse {
 public:
  FakeEvse(Context& ctx, std::string name, const Mac& mac, int segment, EvseSettings settings, RelayChannel& relay,
           Nanos relay_timeout);

  void start() override;

 protected:
  void on_payment_details(const wire::PaymentDetailsReq& req) override;
  void on_authorization(const wire::AuthorizationReq& req) override;

 private:
  RelayChannel& relay_;
  Nanos relay_timeout_;
  bool want_challenge_ = false;
  std::optional<simnet::TimerId> relay_timer_;
};

/// Starts SLAC on `evse`; vehicles and listening nodes on the segment join
/// when the broadcast reaches them.
void slac_join(Evse& evse);

}  // namespace pncsim::actors
