// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/actors/agents.hpp"

#include <algorithm>

namespace pncsim::actors {

namespace {

template <typename T>
constexpr std::size_t index_of() {
  return wire::V2gMessage(T{}).index();
}

bool terminal(Phase phase) {
  return phase == Phase::Authorized || phase == Phase::Rejected || phase == Phase::Stopped;
}

nlohmann::ordered_json action(std::string_view name) {
  nlohmann::ordered_json detail;
  detail["action"] = name;
  return detail;
}

}  // namespace

// ---------------------------------------------------------------- Agent

Agent::Agent(Context& ctx, std::string name, std::string role, const Mac& mac, int segment)
    : ctx_(ctx), mac_(mac) {
  report_.actor = std::move(name);
  report_.role = std::move(role);
  node_ = ctx_.network.attach(mac, report_.actor, segment);
  ctx_.network.set_handler(node_, [this](const simnet::Frame& frame) { on_frame(frame); });
  report_.phase_times.emplace_back(Phase::Idle, ctx_.network.now());
}

void Agent::note_phase(Phase phase, const std::string& cause) {
  if (phase == recorded_) return;
  nlohmann::ordered_json detail;
  detail["from"] = phase_name(recorded_);
  detail["to"] = phase_name(phase);
  if (!cause.empty()) detail["cause"] = cause;
  net().transcript().record(net().now(), simnet::EventKind::PhaseChange, report_.actor, std::move(detail));
  recorded_ = phase;
  report_.phase = phase;
  report_.phase_times.emplace_back(phase, net().now());
  if (!cause.empty() && report_.stop_cause.empty() && phase == Phase::Stopped) report_.stop_cause = cause;
}

void Agent::decision(nlohmann::ordered_json detail) {
  net().transcript().record(net().now(), simnet::EventKind::Decision, report_.actor, std::move(detail));
}

void Agent::raise_flag(DetectorFlag flag, nlohmann::ordered_json detail) {
  nlohmann::ordered_json body;
  body["flag"] = flag_name(flag);
  for (auto& [k, v] : detail.items()) body[k] = v;
  net().transcript().record(net().now(), simnet::EventKind::DetectorFlag, report_.actor, std::move(body));
}

void Agent::on_slac_match(const simnet::Frame& frame) {
  if (report_.joined) return;
  auto match = wire::decode_slac_match(wire::parse_v2gtp(frame.payload).payload);
  report_.joined = true;
  net().set_joined(node_, true);
  auto detail = action("slac_joined");
  detail["peer"] = format_mac(frame.src_mac);
  detail["nid"] = to_hex(match.nid);
  decision(std::move(detail));
}

void Agent::send_v2g(const Mac& dst, std::uint16_t port, const wire::V2gMessage& message) {
  net().send(node_, dst, simnet::Transport::Stream, port,
             wire::frame_v2gtp(wire::kPayloadV2gMessage, wire::encode_tlv(message)));
}

void Agent::send_handshake(const Mac& dst, std::uint16_t port, const Bytes& record) {
  net().send(node_, dst, simnet::Transport::Stream, port, wire::frame_v2gtp(wire::kPayloadHandshake, record));
}

simnet::TimerId Agent::arm(Nanos delay, std::function<void()> fire) { return net().schedule(delay, std::move(fire)); }

void Agent::disarm(std::optional<simnet::TimerId>& timer) {
  if (timer) net().cancel(*timer);
  timer.reset();
}

void slac_join(Evse& evse) { evse.slac_broadcast(); }

// ---------------------------------------------------------------- Evcc

Evcc::Evcc(Context& ctx, std::string name, const Mac& mac, int segment, EvccSettings settings, OobBackend* backend,
           std::string role)
    : Agent(ctx, std::move(name), std::move(role), mac, segment), settings_(std::move(settings)), backend_(backend) {}

bool Evcc::wants_contract_payment() const {
  return settings_.contract.has_value() && !settings_.oob_token;
}

void Evcc::on_frame(const simnet::Frame& frame) {
  if (proto_.phase() == Phase::Stopped) return;
  wire::V2gtpFrame v2gtp;
  try {
    v2gtp = wire::parse_v2gtp(frame.payload);
  } catch (const std::exception& e) {
    auto detail = action("malformed_frame");
    detail["error"] = e.what();
    decision(std::move(detail));
    return;
  }

  switch (v2gtp.payload_type) {
    case wire::kPayloadSlacMatch: {
      if (report_.joined) return;
      on_slac_match(frame);
      sdp_.slac_peer = frame.src_mac;
      proto_.advance(Phase::SlacJoined);
      note_phase(proto_.phase());
      const auto security = settings_.channel.mode == channel::Mode::Plain ? wire::SdpSecurity::None
                                                                           : wire::SdpSecurity::Tls;
      net().send(node_, simnet::kMulticastAll, simnet::Transport::Udp, wire::kSdpServerPort,
                 wire::frame_v2gtp(wire::kPayloadSdpRequest, wire::encode_sdp(wire::SdpRequest{security})));
      timeout_ = arm(settings_.response_timeout, [this] {
        timeout_.reset();
        abort("Timeout: no SDP response");
      });
      return;
    }
    case wire::kPayloadSdpResponse:
      on_sdp_response(frame, v2gtp.payload);
      return;
    case wire::kPayloadHandshake:
      if (frame.src_mac != peer_mac_ || !handshake_) return;
      on_handshake_record(v2gtp.payload);
      return;
    case wire::kPayloadV2gMessage: {
      if (frame.src_mac != peer_mac_ || !handshake_ || !handshake_->done()) return;
      wire::V2gMessage message;
      try {
        message = wire::decode_tlv(v2gtp.payload);
      } catch (const std::exception& e) {
        auto detail = action("malformed_message");
        detail["error"] = e.what();
        decision(std::move(detail));
        abort("Protocol: malformed message");
        return;
      }
      on_v2g(message);
      return;
    }
    default:
      return;
  }
}

void Evcc::on_sdp_response(const simnet::Frame& frame, ByteView payload) {
  if (!report_.joined) return;
  SdpObservation obs;
  try {
    obs = SdpObservation{frame.src_mac, frame.src_ipv6, wire::decode_sdp_response(payload)};
  } catch (const std::exception&) {
    return;
  }
  report_.sdp_responses.push_back(SdpSeen{frame.src_mac, obs.response.port});

  auto verdict = sdp_guard(sdp_, obs, settings_.hardening);
  if (verdict.abort) {
    nlohmann::ordered_json detail;
    detail["responder"] = format_mac(frame.src_mac);
    detail["src_ipv6"] = format_ipv6(frame.src_ipv6);
    raise_flag(*verdict.cause, std::move(detail));
    abort(std::string(flag_name(*verdict.cause)));
    return;
  }
  if (sdp_decided_) return;

  if (!settings_.hardening.multi_response_abort) {
    connect(obs);
    return;
  }
  if (!sdp_window_timer_) {
    sdp_window_timer_ = arm(settings_.sdp_window, [this] {
      sdp_window_timer_.reset();
      if (proto_.phase() == Phase::Stopped || sdp_.seen.empty()) return;
      connect(sdp_.seen.front());
    });
  }
}

void Evcc::connect(const SdpObservation& chosen) {
  sdp_decided_ = true;
  disarm(timeout_);
  peer_mac_ = chosen.src_mac;
  peer_port_ = chosen.response.port;
  if (auto id = net().find(chosen.src_mac)) report_.selected_peer = net().node(*id).name;

  auto detail = action("sdp_selected");
  detail["peer"] = format_mac(chosen.src_mac);
  detail["name"] = report_.selected_peer;
  detail["port"] = chosen.response.port;
  detail["security"] = chosen.response.security == wire::SdpSecurity::Tls ? "tls" : "none";
  decision(std::move(detail));
  proto_.advance(Phase::Discovered);
  note_phase(proto_.phase());

  channel::ChannelConfig cfg = settings_.channel;
  if (chosen.response.security == wire::SdpSecurity::None) cfg.mode = channel::Mode::Plain;
  handshake_.emplace(cfg);
  send_handshake(peer_mac_, peer_port_, handshake_->start(net().rng()));
  timeout_ = arm(settings_.response_timeout, [this] {
    timeout_.reset();
    abort("Timeout: handshake");
  });
}

void Evcc::on_handshake_record(ByteView record) {
  if (handshake_->done()) return;
  auto step = handshake_->on_record(record, net().now());
  for (const auto& out : step.outgoing) send_handshake(peer_mac_, peer_port_, out);

  if (step.failure) {
    const auto& f = *step.failure;
    auto detail = action("handshake_failed");
    detail["code"] = channel::failure_code_name(f.code);
    detail["side"] = channel::side_name(f.side);
    detail["cause"] = pki::chain_error_name(f.cause);
    detail["subject"] = f.subject;
    decision(std::move(detail));
    if (f.code == channel::HandshakeFailure::Code::GeoMismatch) {
      nlohmann::ordered_json flag;
      flag["subject"] = f.subject;
      raise_flag(DetectorFlag::GeoMismatch, std::move(flag));
    }
    std::string cause(channel::failure_code_name(f.code));
    if (f.code == channel::HandshakeFailure::Code::ChainInvalid) cause += std::string(": ") + std::string(pki::chain_error_name(f.cause));
    abort(cause);
    return;
  }
  if (!step.established) return;

  disarm(timeout_);
  channel_ = *step.established;
  report_.peer_station_id = channel_.peer_station_id;
  auto detail = action("channel_established");
  detail["mode"] = channel::mode_name(channel_.mode);
  detail["peer_station_id"] = channel_.peer_station_id;
  decision(std::move(detail));
  if (channel_.mode != channel::Mode::Plain) ctx_.keylog.push_back(channel::export_keylog(channel_));

  proto_.advance(Phase::Connected);
  note_phase(proto_.phase());
  send_request(wire::SessionSetupReq{settings_.evcc_id});
}

void Evcc::send_request(const wire::V2gMessage& request) {
  proto_.sent(request);
  send_v2g(peer_mac_, peer_port_, request);
  disarm(timeout_);
  const Nanos limit = request.index() == index_of<wire::PaymentDetailsReq>() ? settings_.payment_details_timeout
                                                                              : settings_.response_timeout;
  timeout_ = arm(limit, [this, name = std::string(wire::message_name(request))] {
    timeout_.reset();
    abort("Timeout: awaiting response to " + name);
  });
}

void Evcc::on_v2g(const wire::V2gMessage& message) {
  auto tr = proto_.on_response(message);
  if (!tr.legal) {
    auto detail = action("protocol_violation");
    detail["message"] = wire::message_name(message);
    detail["violation"] = tr.violation;
    decision(std::move(detail));
    abort("Protocol: " + tr.violation);
    return;
  }
  disarm(timeout_);
  note_phase(proto_.phase());

  std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, wire::SessionSetupRes>) {
          send_request(wire::ServiceDiscoveryReq{});
        } else if constexpr (std::is_same_v<T, wire::ServiceDiscoveryRes>) {
          choose_payment(m);
        } else if constexpr (std::is_same_v<T, wire::PaymentServiceSelectionRes>) {
          if (chosen_ == wire::PaymentOption::ContractCertificate) {
            send_payment_details();
          } else if (settings_.oob_token && backend_ != nullptr) {
            request_backend_start();
          } else {
            proto_.authorize_externally();
            report_.authorized_by = "external";
            note_phase(proto_.phase());
          }
        } else if constexpr (std::is_same_v<T, wire::PaymentDetailsRes>) {
          report_.challenge = m.challenge;
          on_payment_details_res(m);
        } else if constexpr (std::is_same_v<T, wire::AuthorizationRes>) {
          report_.decision = m.decision;
          if (m.decision == wire::AuthorizationCode::Accepted) report_.authorized_by = "contract";
          auto detail = action("authorization_result");
          detail["code"] = wire::authorization_code_name(m.decision);
          decision(std::move(detail));
          quiesce();
        } else if constexpr (std::is_same_v<T, wire::SessionStopRes>) {
          quiesce();
        }
      },
      message);
}

void Evcc::choose_payment(const wire::ServiceDiscoveryRes& res) {
  auto offered = [&](wire::PaymentOption o) {
    return std::find(res.payment_options.begin(), res.payment_options.end(), o) != res.payment_options.end();
  };
  const bool plain = channel_.mode == channel::Mode::Plain;
  if (wants_contract_payment()) {
    if (offered(wire::PaymentOption::ContractCertificate) && !plain) {
      chosen_ = wire::PaymentOption::ContractCertificate;
    } else if (!settings_.contract) {
      // Relay vehicles have nothing else to offer.
      abort(plain ? "PlainChannel: contract payment refused" : "ContractPaymentUnavailable");
      return;
    }
  }
  if (!chosen_) {
    if (!offered(wire::PaymentOption::ExternalPayment)) {
      abort("NoPaymentOption");
      return;
    }
    chosen_ = wire::PaymentOption::ExternalPayment;
  }
  auto detail = action("payment_selected");
  detail["option"] = wire::payment_option_name(*chosen_);
  decision(std::move(detail));
  send_request(wire::PaymentServiceSelectionReq{*chosen_});
}

void Evcc::request_backend_start() {
  timeout_ = arm(settings_.oob_latency, [this] {
    timeout_.reset();
    const auto result = backend_->authorize(report_.peer_station_id, *settings_.oob_token, net().now(),
                                            &net().transcript());
    timeout_ = arm(settings_.oob_latency, [this, result] {
      timeout_.reset();
      if (proto_.phase() == Phase::Stopped) return;
      if (result != OobResult::RemoteStart) {
        abort("Backend: " + std::string(oob_result_name(result)));
        return;
      }
      proto_.authorize_externally();
      report_.authorized_by = "backend";
      note_phase(proto_.phase());
    });
  });
}

void Evcc::send_payment_details() {
  const auto& contract = *settings_.contract;
  wire::PaymentDetailsReq req;
  req.contract_cert = pki::encode_certificate(contract.certificate);
  for (const auto& c : contract.chain) req.chain.push_back(pki::encode_certificate(c));
  send_request(req);
}

void Evcc::on_payment_details_res(const wire::PaymentDetailsRes& res) {
  pnc::Challenge challenge{res.challenge, net().now(), channel_.session_id};
  std::optional<std::string_view> bound;
  if (settings_.binding == pnc::Binding::StationIdBound) bound = report_.peer_station_id;
  auto detail = action("challenge_signed");
  detail["challenge"] = to_hex(res.challenge);
  detail["bound_to"] = bound ? std::string(*bound) : std::string();
  decision(std::move(detail));
  send_request(wire::AuthorizationReq{pnc::sign_challenge(*settings_.contract, challenge, bound)});
}

void Evcc::quiesce() {
  disarm(timeout_);
  disarm(sdp_window_timer_);
}

void Evcc::abort(const std::string& cause) {
  if (proto_.phase() == Phase::Stopped) return;
  const bool in_session = proto_.session_started() && !terminal(proto_.phase());
  quiesce();
  if (in_session) {
    // Best effort; the answer is not awaited.
    send_v2g(peer_mac_, peer_port_, wire::SessionStopReq{});
  }
  proto_.stop();
  note_phase(Phase::Stopped, cause);
}

// ---------------------------------------------------------------- RelayEvcc

RelayEvcc::RelayEvcc(Context& ctx, std::string name, const Mac& mac, int segment, EvccSettings settings,
                     RelayChannel& relay, Nanos relay_timeout)
    : Evcc(ctx, std::move(name), mac, segment, std::move(settings), nullptr, "relay_evcc"),
      relay_(relay),
      relay_timeout_(relay_timeout) {}

void RelayEvcc::start() {
  relay_.on_item(RelayChannel::End::RelayVehicle, [this](const RelayItem& item) { on_relay(item); });
}

void RelayEvcc::on_relay(const RelayItem& item) {
  if (const auto* cert = std::get_if<RelayCert>(&item)) cert_ = *cert;
  if (const auto* sig = std::get_if<RelaySignature>(&item)) signature_ = *sig;
  pump();
}

void RelayEvcc::pump() {
  if (proto_.phase() == Phase::Stopped) return;
  if (want_cert_ && cert_) {
    want_cert_ = false;
    disarm(relay_timer_);
    auto detail = action("relay_replay");
    detail["item"] = "cert";
    decision(std::move(detail));
    send_request(wire::PaymentDetailsReq{cert_->certificate, cert_->chain});
  }
  if (want_signature_ && signature_) {
    want_signature_ = false;
    disarm(relay_timer_);
    auto detail = action("relay_replay");
    detail["item"] = "signature";
    decision(std::move(detail));
    send_request(wire::AuthorizationReq{signature_->bytes});
  }
}

void RelayEvcc::send_payment_details() {
  want_cert_ = true;
  relay_timer_ = arm(relay_timeout_, [this] {
    relay_timer_.reset();
    abort("RelayTimeout: certificate");
  });
  pump();
}

void RelayEvcc::on_payment_details_res(const wire::PaymentDetailsRes& res) {
  relay_.push(RelayChannel::End::RelayVehicle, RelayChallenge{res.challenge});
  want_signature_ = true;
  relay_timer_ = arm(relay_timeout_, [this] {
    relay_timer_.reset();
    abort("RelayTimeout: signature");
  });
  pump();
}

// ---------------------------------------------------------------- Evse

Evse::Evse(Context& ctx, std::string name, const Mac& mac, int segment, EvseSettings settings, std::string role)
    : Agent(ctx, std::move(name), std::move(role), mac, segment),
      settings_(std::move(settings)),
      proto_(settings_.offered) {
  if (settings_.channel.server_credential) station_id_ = settings_.channel.server_credential->certificate.subject_id;
  settings_.verifier.station_id = station_id_;
  report_.peer_station_id = station_id_;
}

void Evse::start() {
  if (settings_.performs_slac) {
    arm(0, [this] { slac_broadcast(); });
  }
}

void Evse::slac_broadcast() {
  wire::SlacMatch match;
  net().rng().fill(match.nmk);
  net().rng().fill(match.nid);
  report_.joined = true;
  net().set_joined(node_, true);
  auto detail = action("slac_match");
  detail["nid"] = to_hex(match.nid);
  decision(std::move(detail));
  net().send(node_, simnet::kMulticastAll, simnet::Transport::Udp, 0,
             wire::frame_v2gtp(wire::kPayloadSlacMatch, wire::encode_slac_match(match)));
  proto_.advance(Phase::SlacJoined);
  note_phase(proto_.phase());
}

void Evse::on_frame(const simnet::Frame& frame) {
  if (silent_ || proto_.phase() == Phase::Stopped) return;
  wire::V2gtpFrame v2gtp;
  try {
    v2gtp = wire::parse_v2gtp(frame.payload);
  } catch (const std::exception&) {
    return;
  }
  switch (v2gtp.payload_type) {
    case wire::kPayloadSlacMatch:
      if (!report_.joined) {
        on_slac_match(frame);
        proto_.advance(Phase::SlacJoined);
        note_phase(proto_.phase());
      }
      return;
    case wire::kPayloadSdpRequest:
      if (report_.joined) on_sdp_request(frame);
      return;
    case wire::kPayloadHandshake:
      on_handshake_record(frame, v2gtp.payload);
      return;
    case wire::kPayloadV2gMessage: {
      if (!peer_ || frame.src_mac != *peer_ || !handshake_ || !handshake_->done()) return;
      wire::V2gMessage message;
      try {
        message = wire::decode_tlv(v2gtp.payload);
      } catch (const std::exception&) {
        finish("Protocol: malformed message");
        return;
      }
      on_v2g(message);
      return;
    }
    default:
      return;
  }
}

void Evse::on_sdp_request(const simnet::Frame& frame) {
  if (peer_) return;
  wire::SdpResponse res;
  res.address = net().node(node_).ipv6;
  res.port = settings_.port;
  res.security = settings_.channel.mode == channel::Mode::Plain ? wire::SdpSecurity::None : wire::SdpSecurity::Tls;
  net().send(node_, frame.src_mac, simnet::Transport::Udp, wire::kSdpServerPort,
             wire::frame_v2gtp(wire::kPayloadSdpResponse, wire::encode_sdp(res)));
  proto_.advance(Phase::Discovered);
  note_phase(proto_.phase());
}

void Evse::on_handshake_record(const simnet::Frame& frame, ByteView record) {
  if (frame.port != settings_.port) return;
  if (!peer_) {
    peer_ = frame.src_mac;
    handshake_.emplace(settings_.channel);
    proto_.advance(Phase::Discovered);
  }
  if (frame.src_mac != *peer_ || handshake_->done()) return;

  auto step = handshake_->on_record(record, net().now(), net().rng());
  for (const auto& out : step.outgoing) send_handshake(*peer_, settings_.port, out);
  if (step.failure) {
    auto detail = action("handshake_failed");
    detail["code"] = channel::failure_code_name(step.failure->code);
    detail["side"] = channel::side_name(step.failure->side);
    detail["cause"] = pki::chain_error_name(step.failure->cause);
    decision(std::move(detail));
    finish(std::string(channel::failure_code_name(step.failure->code)));
    return;
  }
  if (!step.established) return;
  channel_ = *step.established;
  proto_.advance(Phase::Connected);
  note_phase(proto_.phase());
  rearm_sequence_timer();
}

void Evse::rearm_sequence_timer() {
  disarm(sequence_timer_);
  sequence_timer_ = arm(settings_.sequence_timeout, [this] {
    sequence_timer_.reset();
    finish("SequenceTimeout");
  });
}

void Evse::reply(const wire::V2gMessage& message) {
  if (!silent_) send_v2g(*peer_, settings_.port, message);
}

void Evse::finish(const std::string& cause) {
  disarm(sequence_timer_);
  proto_.stop();
  note_phase(Phase::Stopped, cause);
}

void Evse::on_v2g(const wire::V2gMessage& message) {
  auto tr = proto_.on_request(message);
  if (!tr.legal) {
    if (tr.before == Phase::Stopped) return;
    auto detail = action("protocol_violation");
    detail["message"] = wire::message_name(message);
    detail["violation"] = tr.violation;
    decision(std::move(detail));
    finish("Protocol: " + tr.violation);
    return;
  }
  if (!terminal(proto_.phase())) rearm_sequence_timer();

  std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, wire::SessionSetupReq>) {
          reply(wire::SessionSetupRes{station_id_});
        } else if constexpr (std::is_same_v<T, wire::ServiceDiscoveryReq>) {
          note_phase(proto_.phase());
          reply(wire::ServiceDiscoveryRes{settings_.offered});
        } else if constexpr (std::is_same_v<T, wire::PaymentServiceSelectionReq>) {
          note_phase(proto_.phase());
          reply(wire::PaymentServiceSelectionRes{});
          if (m.selected == wire::PaymentOption::ExternalPayment && !settings_.awaits_backend) {
            proto_.decide(true);
            report_.authorized_by = "external";
            disarm(sequence_timer_);
            note_phase(proto_.phase());
          }
        } else if constexpr (std::is_same_v<T, wire::PaymentDetailsReq>) {
          note_phase(proto_.phase());
          on_payment_details(m);
        } else if constexpr (std::is_same_v<T, wire::AuthorizationReq>) {
          on_authorization(m);
        } else if constexpr (std::is_same_v<T, wire::SessionStopReq>) {
          reply(wire::SessionStopRes{});
          disarm(sequence_timer_);
          note_phase(Phase::Stopped, "SessionStopReq");
        }
      },
      message);
}

void Evse::on_payment_details(const wire::PaymentDetailsReq& req) {
  details_valid_ = true;
  try {
    contract_cert_ = pki::decode_certificate(req.contract_cert);
    contract_chain_.clear();
    for (const auto& c : req.chain) contract_chain_.push_back(pki::decode_certificate(c));
  } catch (const std::exception&) {
    details_valid_ = false;
  }
  issued_ = pnc::generate_challenge(net().rng(), channel_.session_id, net().now());
  report_.challenge = issued_->bytes;
  auto detail = action("challenge_issued");
  detail["challenge"] = to_hex(issued_->bytes);
  decision(std::move(detail));
  t_sent_ = net().now();
  reply(wire::PaymentDetailsRes{issued_->bytes});
}

void Evse::on_authorization(const wire::AuthorizationReq& req) {
  pnc::AuthorizationDecision verdict;
  if (!details_valid_ || !issued_) {
    verdict.code = wire::AuthorizationCode::ChainInvalid;
  } else {
    pnc::VerifierContext ctx = settings_.verifier;
    ctx.now_seconds = wall_seconds();
    verdict = pnc::verify_authorization(contract_cert_, contract_chain_, *issued_, *issued_, req.signature, ctx,
                                        t_sent_, net().now());
  }
  auto detail = action("authorization_decision");
  detail["code"] = wire::authorization_code_name(verdict.code);
  detail["policy"] = pnc::describe(settings_.verifier.policy);
  detail["measured_latency"] = net().now() - t_sent_;
  if (details_valid_) detail["contract_id"] = contract_cert_.subject_id;
  decision(std::move(detail));
  if (verdict.code == wire::AuthorizationCode::TimingExceeded) {
    nlohmann::ordered_json flag;
    flag["measured_latency"] = net().now() - t_sent_;
    flag["threshold"] = settings_.verifier.policy.timing_threshold.value_or(0);
    raise_flag(DetectorFlag::TimingExceeded, std::move(flag));
  }

  report_.decision = verdict.code;
  proto_.decide(verdict.accepted());
  if (verdict.accepted()) {
    report_.authorized_by = "contract";
    report_.billed_to = contract_cert_.subject_id;
  }
  disarm(sequence_timer_);
  note_phase(proto_.phase());
  reply(wire::AuthorizationRes{verdict.code});
}

void Evse::remote_start(const std::string& contract_id) {
  const bool waiting = proto_.phase() == Phase::PaymentSelected &&
                       proto_.selected() == wire::PaymentOption::ExternalPayment && settings_.awaits_backend;
  auto detail = action(waiting ? "remote_start" : "remote_start_ignored");
  detail["contract_id"] = contract_id;
  decision(std::move(detail));
  if (!waiting) return;
  proto_.decide(true);
  report_.authorized_by = "backend";
  report_.billed_to = contract_id;
  disarm(sequence_timer_);
  note_phase(proto_.phase());
}

// ---------------------------------------------------------------- FakeEvse

FakeEvse::FakeEvse(Context& ctx, std::string name, const Mac& mac, int segment, EvseSettings settings,
                   RelayChannel& relay, Nanos relay_timeout)
    : Evse(ctx, std::move(name), mac, segment, std::move(settings), "fake_evse"),
      relay_(relay),
      relay_timeout_(relay_timeout) {}

void FakeEvse::start() {
  Evse::start();
  relay_.on_item(RelayChannel::End::FakeStation, [this](const RelayItem& item) {
    const auto* challenge = std::get_if<RelayChallenge>(&item);
    if (challenge == nullptr || !want_challenge_ || proto_.phase() == Phase::Stopped) return;
    want_challenge_ = false;
    disarm(relay_timer_);
    report_.challenge = challenge->bytes;
    auto detail = action("challenge_forwarded");
    detail["challenge"] = to_hex(challenge->bytes);
    decision(std::move(detail));
    t_sent_ = net().now();
    reply(wire::PaymentDetailsRes{challenge->bytes});
  });
}

void FakeEvse::on_payment_details(const wire::PaymentDetailsReq& req) {
  relay_.push(RelayChannel::End::FakeStation, RelayCert{req.contract_cert, req.chain});
  want_challenge_ = true;
  relay_timer_ = arm(relay_timeout_, [this] {
    relay_timer_.reset();
    finish("RelayTimeout: challenge");
  });
}

void FakeEvse::on_authorization(const wire::AuthorizationReq& req) {
  relay_.push(RelayChannel::End::FakeStation, RelaySignature{req.signature});
  decision(action("signature_captured"));
  silent_ = true;
  finish("SignatureRelayed");
}

}  // namespace pncsim::actors
