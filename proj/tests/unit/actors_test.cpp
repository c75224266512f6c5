// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pncsim/actors/scenario.hpp"

namespace pncsim::actors {
namespace {

using wire::AuthorizationCode;
using wire::PaymentOption;

// ---------------------------------------------------------------- helpers

std::vector<wire::V2gMessage> one_of_each() {
  return {wire::SessionSetupReq{"VIN"},
          wire::SessionSetupRes{"EVSE"},
          wire::ServiceDiscoveryReq{},
          wire::ServiceDiscoveryRes{{PaymentOption::ContractCertificate}},
          wire::PaymentServiceSelectionReq{PaymentOption::ContractCertificate},
          wire::PaymentServiceSelectionRes{},
          wire::PaymentDetailsReq{{0x40}, {}},
          wire::PaymentDetailsRes{},
          wire::AuthorizationReq{},
          wire::AuthorizationRes{},
          wire::SessionStopReq{},
          wire::SessionStopRes{}};
}

std::string name_of(const wire::V2gMessage& m) { return std::string(wire::message_name(m)); }

/// An EVSE state machine driven to `target` through the legal sequence.
/// `started` only matters for Connected.
EvseProtocol evse_at(Phase target, bool started) {
  EvseProtocol p;
  const std::vector<Phase> lower{Phase::SlacJoined, Phase::Discovered, Phase::Connected};
  for (Phase ph : lower) {
    if (target == Phase::Idle) return p;
    p.advance(ph);
    if (ph == target && (ph != Phase::Connected || !started)) return p;
  }
  EXPECT_TRUE(p.on_request(wire::SessionSetupReq{"VIN"}).legal);
  if (target == Phase::Connected) return p;
  EXPECT_TRUE(p.on_request(wire::ServiceDiscoveryReq{}).legal);
  if (target == Phase::ServiceDiscovered) return p;
  EXPECT_TRUE(p.on_request(wire::PaymentServiceSelectionReq{PaymentOption::ContractCertificate}).legal);
  if (target == Phase::PaymentSelected) return p;
  EXPECT_TRUE(p.on_request(wire::PaymentDetailsReq{}).legal);
  if (target == Phase::DetailsExchanged) return p;
  if (target == Phase::Authorized || target == Phase::Rejected) {
    EXPECT_TRUE(p.on_request(wire::AuthorizationReq{}).legal);
    p.decide(target == Phase::Authorized);
    return p;
  }
  p.stop();
  return p;
}

ScenarioResult run(const std::string& name) { return run_scenario(builtin_scenario(name)); }

std::vector<CheckResult> failures(const ScenarioConfig& c, const ScenarioResult& r) {
  std::vector<CheckResult> out;
  for (auto& k : check_expectation(c, expect(c), r)) {
    if (!k.passed) out.push_back(k);
  }
  return out;
}

std::string describe(const std::vector<CheckResult>& checks) {
  std::string s;
  for (const auto& k : checks) s += k.name + " (" + k.detail + "); ";
  return s;
}

// ---------------------------------------------------------------- protocol

TEST(EvseProtocol, FuzzEachMessageAtEachPhase) {
  // Independent table of what a station may accept.
  struct Case {
    Phase phase;
    bool started;
    std::set<std::string> legal;
  };
  const std::vector<Case> cases{
      {Phase::Idle, false, {}},
      {Phase::SlacJoined, false, {}},
      {Phase::Discovered, false, {}},
      {Phase::Connected, false, {"SessionSetupReq"}},
      {Phase::Connected, true, {"ServiceDiscoveryReq", "SessionStopReq"}},
      {Phase::ServiceDiscovered, true, {"PaymentServiceSelectionReq", "SessionStopReq"}},
      {Phase::PaymentSelected, true, {"PaymentDetailsReq", "SessionStopReq"}},
      {Phase::DetailsExchanged, true, {"AuthorizationReq", "SessionStopReq"}},
      {Phase::Authorized, true, {"SessionStopReq"}},
      {Phase::Rejected, true, {"SessionStopReq"}},
      {Phase::Stopped, true, {}},
  };
  for (const auto& c : cases) {
    for (const auto& m : one_of_each()) {
      auto p = evse_at(c.phase, c.started);
      ASSERT_EQ(p.phase(), c.phase);
      auto tr = p.on_request(m);
      const bool want = c.legal.count(name_of(m)) != 0;
      EXPECT_EQ(tr.legal, want) << name_of(m) << " in " << phase_name(c.phase) << (c.started ? " (started)" : "");
      if (!tr.legal) {
        EXPECT_EQ(p.phase(), Phase::Stopped);
        EXPECT_FALSE(tr.violation.empty());
      } else {
        EXPECT_TRUE(tr.after == tr.before || is_forward(tr.before, tr.after));
      }
    }
  }
}

TEST(EvseProtocol, AuthorizationBeforePaymentDetailsIsViolation) {
  auto p = evse_at(Phase::PaymentSelected, true);
  auto tr = p.on_request(wire::AuthorizationReq{});
  EXPECT_FALSE(tr.legal);
  EXPECT_NE(tr.violation.find("AuthorizationReq"), std::string::npos);
  EXPECT_EQ(p.phase(), Phase::Stopped);
}

TEST(EvseProtocol, UnofferedOptionIsViolation) {
  EvseProtocol p({PaymentOption::ExternalPayment});
  for (Phase ph : {Phase::SlacJoined, Phase::Discovered, Phase::Connected}) p.advance(ph);
  ASSERT_TRUE(p.on_request(wire::SessionSetupReq{}).legal);
  ASSERT_TRUE(p.on_request(wire::ServiceDiscoveryReq{}).legal);
  EXPECT_FALSE(p.on_request(wire::PaymentServiceSelectionReq{PaymentOption::ContractCertificate}).legal);
}

TEST(EvseProtocol, ExternalDecisionOnlyAfterExternalSelection) {
  auto contract = evse_at(Phase::PaymentSelected, true);
  contract.decide(true);
  EXPECT_EQ(contract.phase(), Phase::PaymentSelected);

  EvseProtocol p;
  for (Phase ph : {Phase::SlacJoined, Phase::Discovered, Phase::Connected}) p.advance(ph);
  ASSERT_TRUE(p.on_request(wire::SessionSetupReq{}).legal);
  ASSERT_TRUE(p.on_request(wire::ServiceDiscoveryReq{}).legal);
  ASSERT_TRUE(p.on_request(wire::PaymentServiceSelectionReq{PaymentOption::ExternalPayment}).legal);
  EXPECT_FALSE(p.on_request(wire::PaymentDetailsReq{}).legal);
}

TEST(EvccProtocol, OnlyTheAwaitedResponseIsLegal) {
  const auto all = one_of_each();
  for (std::size_t sent = 0; sent < all.size(); sent += 2) {
    for (const auto& m : all) {
      EvccProtocol p;
      for (Phase ph : {Phase::SlacJoined, Phase::Discovered, Phase::Connected}) p.advance(ph);
      p.sent(all[sent]);
      auto tr = p.on_response(m);
      EXPECT_EQ(tr.legal, m.index() == sent + 1) << "sent " << name_of(all[sent]) << ", got " << name_of(m);
    }
  }
}

TEST(EvccProtocol, NothingIsLegalWithoutOutstandingRequest) {
  for (const auto& m : one_of_each()) {
    EvccProtocol p;
    p.advance(Phase::Connected);
    EXPECT_FALSE(p.on_response(m).legal) << name_of(m);
    EXPECT_EQ(p.phase(), Phase::Stopped);
  }
}

TEST(EvccProtocol, AuthorizationResultSelectsTerminalPhase) {
  for (auto code : {AuthorizationCode::Accepted, AuthorizationCode::BindingMismatch}) {
    EvccProtocol p;
    p.advance(Phase::Connected);
    p.sent(wire::AuthorizationReq{});
    ASSERT_TRUE(p.on_response(wire::AuthorizationRes{code}).legal);
    EXPECT_EQ(p.phase(), code == AuthorizationCode::Accepted ? Phase::Authorized : Phase::Rejected);
  }
}

TEST(Phase, ForwardOrder) {
  EXPECT_TRUE(is_forward(Phase::Idle, Phase::SlacJoined));
  EXPECT_TRUE(is_forward(Phase::DetailsExchanged, Phase::Authorized));
  EXPECT_TRUE(is_forward(Phase::DetailsExchanged, Phase::Rejected));
  EXPECT_FALSE(is_forward(Phase::Authorized, Phase::Rejected));
  EXPECT_FALSE(is_forward(Phase::Rejected, Phase::Authorized));
  EXPECT_FALSE(is_forward(Phase::Connected, Phase::Discovered));
  EXPECT_TRUE(is_forward(Phase::Connected, Phase::Stopped));
  EXPECT_FALSE(is_forward(Phase::Stopped, Phase::Idle));
}

// ---------------------------------------------------------------- SDP guard

constexpr Mac kLegit{0x02, 0, 0, 0, 0x0A, 0x0E};
constexpr Mac kRogue{0x02, 0, 0, 0, 0x0A, 0x0F};

SdpObservation honest(const Mac& mac) { return SdpObservation{mac, simnet::eui64_ipv6(mac), {}}; }

TEST(SdpGuard, SingleResponseContinues) {
  for (bool multi : {false, true}) {
    for (bool consistency : {false, true}) {
      SdpGuardState state;
      state.slac_peer = kLegit;
      auto v = sdp_guard(state, honest(kLegit), {multi, consistency});
      EXPECT_FALSE(v.abort);
      EXPECT_EQ(state.seen.size(), 1u);
    }
  }
}

TEST(SdpGuard, SecondMacAbortsWhenHardened) {
  SdpGuardState state;
  EXPECT_FALSE(sdp_guard(state, honest(kRogue), {true, false}).abort);
  auto v = sdp_guard(state, honest(kLegit), {true, false});
  EXPECT_TRUE(v.abort);
  EXPECT_EQ(v.cause, DetectorFlag::SdpMultiResponse);
}

TEST(SdpGuard, RepeatFromSameMacIsNotMulti) {
  SdpGuardState state;
  EXPECT_FALSE(sdp_guard(state, honest(kLegit), {true, false}).abort);
  EXPECT_FALSE(sdp_guard(state, honest(kLegit), {true, false}).abort);
}

TEST(SdpGuard, SecondMacToleratedWithoutHardening) {
  SdpGuardState state;
  EXPECT_FALSE(sdp_guard(state, honest(kRogue), {}).abort);
  EXPECT_FALSE(sdp_guard(state, honest(kLegit), {}).abort);
  EXPECT_EQ(state.seen.size(), 2u);
}

TEST(SdpGuard, SpoofedAddressAbortsWithConsistency) {
  SdpGuardState state;
  SdpObservation spoof{kRogue, simnet::eui64_ipv6(kLegit), {}};
  auto v = sdp_guard(state, spoof, {false, true});
  EXPECT_TRUE(v.abort);
  EXPECT_EQ(v.cause, DetectorFlag::MacIpMismatch);
}

TEST(SdpGuard, ResponderOtherThanSlacPeerAbortsWithConsistency) {
  SdpGuardState state;
  state.slac_peer = kLegit;
  auto v = sdp_guard(state, honest(kRogue), {false, true});
  EXPECT_TRUE(v.abort);
  EXPECT_EQ(v.cause, DetectorFlag::MacIpMismatch);
}

// ---------------------------------------------------------------- relay channel

TEST(RelayChannel, DeliversAfterLatencyInFifoOrder) {
  simnet::Network net(1, kMillisecond);
  RelayChannel relay(net, 500 * kMillisecond);
  std::vector<std::pair<std::string, Nanos>> got;
  relay.on_item(RelayChannel::End::FakeStation,
                [&](const RelayItem& item) { got.emplace_back(std::string(relay_item_name(item)), net.now()); });
  RelayChallenge c;
  c.bytes.fill(0xAB);
  EXPECT_TRUE(relay.push(RelayChannel::End::RelayVehicle, c));
  net.schedule(10 * kMillisecond, [&] { relay.push(RelayChannel::End::RelayVehicle, RelaySignature{}); });
  while (net.step()) {
  }
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], (std::pair<std::string, Nanos>{"challenge", 500 * kMillisecond}));
  EXPECT_EQ(got[1], (std::pair<std::string, Nanos>{"signature", 510 * kMillisecond}));
  EXPECT_EQ(relay.delivered(), 2u);
}

TEST(RelayChannel, EachKindOnce) {
  simnet::Network net(1, kMillisecond);
  RelayChannel relay(net, 0);
  EXPECT_TRUE(relay.push(RelayChannel::End::FakeStation, RelayCert{{1, 2, 3}, {}}));
  EXPECT_FALSE(relay.push(RelayChannel::End::FakeStation, RelayCert{{4}, {}}));
  EXPECT_FALSE(relay.push(RelayChannel::End::RelayVehicle, RelayCert{{5}, {}}));
  int count = 0;
  relay.on_item(RelayChannel::End::RelayVehicle, [&](const RelayItem& item) {
    ++count;
    EXPECT_EQ(std::get<RelayCert>(item).certificate, (Bytes{1, 2, 3}));
  });
  while (net.step()) {
  }
  EXPECT_EQ(count, 1);
}

TEST(RelayChannel, BuffersUntilConsumerExists) {
  simnet::Network net(1, kMillisecond);
  RelayChannel relay(net, kMillisecond);
  relay.push(RelayChannel::End::FakeStation, RelayCert{{9}, {}});
  relay.push(RelayChannel::End::FakeStation, RelaySignature{});
  while (net.step()) {
  }
  std::vector<std::string> order;
  relay.on_item(RelayChannel::End::RelayVehicle,
                [&](const RelayItem& item) { order.emplace_back(relay_item_name(item)); });
  EXPECT_EQ(order, (std::vector<std::string>{"cert", "signature"}));
  // Consumed exactly once.
  relay.on_item(RelayChannel::End::RelayVehicle, [&](const RelayItem&) { order.emplace_back("again"); });
  EXPECT_EQ(order.size(), 2u);
}

TEST(RelayChannel, TranscriptCarriesPayload) {
  simnet::Network net(1, kMillisecond);
  RelayChannel relay(net, 0);
  relay.push(RelayChannel::End::FakeStation, RelayCert{{0xCA, 0xFE}, {}});
  const auto& e = net.transcript().events().back();
  EXPECT_EQ(e.actor, "relay");
  EXPECT_EQ(e.detail["payload"], "CAFE");
  EXPECT_EQ(e.detail["item"], "cert");
}

// ---------------------------------------------------------------- backend

TEST(OobBackend, RegisteredTokenStartsNamedStation) {
  OobBackend backend;
  backend.register_token("tok", "DE-X");
  std::vector<std::string> started;
  backend.register_station("DE*ICE*E001", [&](const std::string& c) { started.push_back(c); });
  simnet::Transcript t;
  EXPECT_EQ(backend.authorize("DE*ICE*E001", "tok", 7, &t), OobResult::RemoteStart);
  EXPECT_EQ(started, std::vector<std::string>{"DE-X"});
  ASSERT_EQ(backend.remote_starts().size(), 1u);
  EXPECT_EQ(backend.remote_starts()[0], (RemoteStartRecord{7, "DE*ICE*E001", "DE-X"}));
  EXPECT_EQ(t.events().back().detail["result"], "RemoteStart");
}

TEST(OobBackend, UnknownTokenDenied) {
  OobBackend backend;
  backend.register_station("S");
  EXPECT_EQ(backend.authorize("S", "nope", 0), OobResult::Denied);
  EXPECT_TRUE(backend.remote_starts().empty());
}

TEST(OobBackend, UnknownStation) {
  OobBackend backend;
  backend.register_token("tok", "DE-X");
  EXPECT_EQ(backend.authorize("S", "tok", 0), OobResult::UnknownStation);
  EXPECT_TRUE(backend.remote_starts().empty());
}

// ---------------------------------------------------------------- SLAC

class Listener : public Agent {
 public:
  Listener(Context& ctx, std::string name, const Mac& mac) : Agent(ctx, std::move(name), "listener", mac, 0) {}
  Bytes last_payload;

 protected:
  void on_frame(const simnet::Frame& frame) override {
    if (wire::parse_v2gtp(frame.payload).payload_type == wire::kPayloadSlacMatch) {
      last_payload = frame.payload;
      on_slac_match(frame);
    }
  }
};

TEST(Slac, PairAndListenerJoin) {
  simnet::Network net(3, kMillisecond);
  Context ctx{net, 0, {}};
  EvseSettings s;
  s.performs_slac = false;
  Evse evse(ctx, "evse", Mac{2, 0, 0, 0, 0, 1}, 0, s);
  Evcc ev(ctx, "ev", Mac{2, 0, 0, 0, 0, 2}, 0, EvccSettings{});
  Listener attacker(ctx, "attacker", Mac{2, 0, 0, 0, 0, 3});
  slac_join(evse);
  net.run_until(5 * kMillisecond);
  EXPECT_TRUE(evse.report().joined);
  EXPECT_TRUE(ev.report().joined);
  EXPECT_TRUE(attacker.report().joined);
  EXPECT_TRUE(net.node(attacker.node()).joined);
  auto match = wire::decode_slac_match(wire::parse_v2gtp(attacker.last_payload).payload);
  EXPECT_EQ(match.nmk.size(), 16u);
  EXPECT_EQ(match.nid.size(), 7u);
  EXPECT_EQ(wire::parse_v2gtp(attacker.last_payload).payload.size(), 23u);
}

TEST(Slac, OtherCableDoesNotJoin) {
  simnet::Network net(3, kMillisecond);
  Context ctx{net, 0, {}};
  EvseSettings s;
  s.performs_slac = false;
  Evse evse(ctx, "evse", Mac{2, 0, 0, 0, 0, 1}, 0, s);
  Evcc far(ctx, "far", Mac{2, 0, 0, 0, 0, 2}, 1, EvccSettings{});
  slac_join(evse);
  net.run_until(5 * kMillisecond);
  EXPECT_FALSE(far.report().joined);
}

// ---------------------------------------------------------------- built-in scenarios

TEST(Scenarios, ListContainsRequiredNames) {
  std::set<std::string> names;
  for (const auto& b : builtin_scenarios()) {
    names.insert(b.name);
    EXPECT_FALSE(b.description.empty()) << b.name;
  }
  for (const char* n : {"benign", "external-payment", "relay-baseline", "relay-bound-sig", "relay-timing",
                        "relay-compromised-target", "sdp-spoof", "sdp-hardened", "geo-mismatch", "oob-auth",
                        "oob-relay-attempt"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
}

TEST(Scenarios, EveryBuiltinMeetsItsExpectation) {
  for (const auto& b : builtin_scenarios()) {
    auto c = builtin_scenario(b.name);
    auto r = run_scenario(c);
    auto bad = failures(c, r);
    EXPECT_TRUE(bad.empty()) << b.name << ": " << describe(bad);
  }
}

TEST(Scenarios, UnknownNameIsConfigError) {
  try {
    builtin_scenario("no-such-thing");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "base");
  }
}

TEST(Scenarios, BenignBillsOwnContract) {
  auto r = run("benign");
  const auto* ev = r.outcome.session("ev");
  ASSERT_NE(ev, nullptr);
  EXPECT_EQ(ev->phase, Phase::Authorized);
  EXPECT_EQ(ev->authorized_by, "contract");
  EXPECT_EQ(r.outcome.energy_billed_to, std::string(kAttackerContract));
  EXPECT_EQ(r.outcome.session("evse")->decision, AuthorizationCode::Accepted);
  // Benign latency: two link hops.
  for (const auto& e : r.transcript.events()) {
    if (e.kind == simnet::EventKind::Decision && e.detail.value("action", "") == "authorization_decision") {
      EXPECT_EQ(e.detail["measured_latency"], 2 * kMillisecond);
    }
  }
}

TEST(Scenarios, ExternalPaymentSendsNoContractMessages) {
  auto r = run("external-payment");
  for (const auto& m : wire_messages(r.transcript)) {
    EXPECT_FALSE(std::holds_alternative<wire::PaymentDetailsReq>(m.message));
    EXPECT_FALSE(std::holds_alternative<wire::AuthorizationReq>(m.message));
  }
  EXPECT_EQ(r.outcome.session("ev")->phase, Phase::Authorized);
  EXPECT_FALSE(r.outcome.energy_billed_to.has_value());
}

TEST(Scenarios, RelayBaselineReproducesTheAttack) {
  auto r = run("relay-baseline");
  const auto& o = r.outcome;
  EXPECT_EQ(o.session("attacker_ev")->phase, Phase::Authorized);
  EXPECT_EQ(o.energy_billed_to, std::string(kVictimContract));
  EXPECT_EQ(o.session("victim")->phase, Phase::Stopped);
  EXPECT_FALSE(o.session("victim")->decision.has_value());
  ASSERT_TRUE(o.session("evse")->challenge && o.session("victim")->challenge);
  EXPECT_EQ(*o.session("evse")->challenge, *o.session("victim")->challenge);

  // The victim's certificate bytes cross the relay after its PaymentDetailsReq.
  Bytes victim_cert;
  Nanos sent_at = -1;
  for (const auto& m : wire_messages(r.transcript)) {
    if (const auto* req = std::get_if<wire::PaymentDetailsReq>(&m.message); req && m.from == "victim") {
      victim_cert = req->contract_cert;
      sent_at = m.t;
    }
  }
  ASSERT_GE(sent_at, 0);
  bool relayed = false;
  for (const auto& e : r.transcript.events()) {
    if (e.actor == "relay" && e.detail.value("action", "") == "relay_push" && e.detail["item"] == "cert") {
      relayed = e.t >= sent_at && e.detail["payload"] == to_hex(victim_cert);
    }
  }
  EXPECT_TRUE(relayed);
}

TEST(Scenarios, RelayMessageOrderAtRegularStation) {
  auto r = run("relay-baseline");
  std::vector<std::string> seen;
  for (const auto& m : wire_messages(r.transcript)) {
    if (m.from == "attacker_ev" || m.to == "attacker_ev") seen.push_back(name_of(m.message));
  }
  const std::vector<std::string> want{"SessionSetupReq",  "SessionSetupRes",   "ServiceDiscoveryReq",
                                      "ServiceDiscoveryRes", "PaymentServiceSelectionReq",
                                      "PaymentServiceSelectionRes", "PaymentDetailsReq", "PaymentDetailsRes",
                                      "AuthorizationReq", "AuthorizationRes"};
  EXPECT_EQ(seen, want);
}

TEST(Scenarios, BoundSignatureRejectsRelayButNotBenign) {
  auto relay = run("relay-bound-sig");
  EXPECT_EQ(relay.outcome.session("evse")->decision, AuthorizationCode::BindingMismatch);
  EXPECT_EQ(relay.outcome.session("attacker_ev")->phase, Phase::Rejected);
  EXPECT_FALSE(relay.outcome.energy_billed_to);

  auto benign = builtin_scenario("benign");
  benign.policy = builtin_scenario("relay-bound-sig").policy;
  auto r = run_scenario(benign);
  EXPECT_EQ(r.outcome.session("ev")->phase, Phase::Authorized);
}

TEST(Scenarios, TimingGuardDependsOnRelayLatency) {
  auto slow = run("relay-timing");
  EXPECT_EQ(slow.outcome.session("evse")->decision, AuthorizationCode::TimingExceeded);
  EXPECT_TRUE(slow.outcome.has_flag(DetectorFlag::TimingExceeded));

  auto c = builtin_scenario("relay-timing");
  c.relay_latency = 50 * kMillisecond;
  auto fast = run_scenario(c);
  EXPECT_EQ(fast.outcome.session("attacker_ev")->phase, Phase::Authorized);
  EXPECT_TRUE(failures(c, fast).empty()) << describe(failures(c, fast));
}

TEST(Scenarios, TimingGuardBoundaryInVirtualTime) {
  // Measured = 2 relay + 2 victim link + 2 station link = 2 * 500 + 4 ms.
  auto c = builtin_scenario("relay-timing");
  c.policy.timing_threshold = 1004 * kMillisecond;
  EXPECT_EQ(run_scenario(c).outcome.session("evse")->decision, AuthorizationCode::Accepted);
  c.policy.timing_threshold = 1004 * kMillisecond - 1;
  EXPECT_EQ(run_scenario(c).outcome.session("evse")->decision, AuthorizationCode::TimingExceeded);
}

TEST(Scenarios, CompromisedTargetDefeatsBinding) {
  auto r = run("relay-compromised-target");
  EXPECT_EQ(r.outcome.session("attacker_ev")->phase, Phase::Authorized);
  EXPECT_EQ(r.outcome.session("victim")->peer_station_id, std::string(kTargetStation));
  EXPECT_EQ(r.outcome.energy_billed_to, std::string(kVictimContract));
}

TEST(Scenarios, GeoMismatchAbortsAndZeroDistanceProceeds) {
  auto far = run("geo-mismatch");
  EXPECT_EQ(far.outcome.session("victim")->stop_cause, "GeoMismatch");
  EXPECT_TRUE(far.outcome.has_flag(DetectorFlag::GeoMismatch));
  EXPECT_NE(far.outcome.session("attacker_ev")->phase, Phase::Authorized);

  auto c = builtin_scenario("geo-mismatch");
  c.compromised_offset_m = 0;
  auto near = run_scenario(c);
  EXPECT_EQ(near.outcome.session("victim")->peer_station_id, std::string(kCompromisedStation));
  EXPECT_FALSE(near.outcome.has_flag(DetectorFlag::GeoMismatch));
  EXPECT_TRUE(failures(c, near).empty()) << describe(failures(c, near));
}

TEST(Scenarios, GeoThresholdSweepMatchesHaversine) {
  for (double offset : {0.0, 100.0, 499.0, 501.0, 2'000.0, 10'000.0}) {
    auto c = builtin_scenario("geo-mismatch");
    c.compromised_offset_m = offset;
    auto r = run_scenario(c);
    EXPECT_EQ(r.outcome.has_flag(DetectorFlag::GeoMismatch), offset > 500.0) << offset;
    EXPECT_TRUE(failures(c, r).empty()) << offset << ": " << describe(failures(c, r));
  }
}

TEST(Scenarios, SdpSpoofFirstResponderWins) {
  auto r = run("sdp-spoof");
  EXPECT_EQ(r.outcome.session("victim")->selected_peer, "fake_evse");
  EXPECT_EQ(r.outcome.session("victim")->sdp_responses.size(), 2u);
  EXPECT_EQ(r.outcome.session("fake_evse")->joined, true);
}

TEST(Scenarios, SdpSlowSpooferLosesRace) {
  auto c = builtin_scenario("sdp-spoof");
  c.spoof_latency = 5 * kMillisecond;
  auto r = run_scenario(c);
  EXPECT_EQ(r.outcome.session("victim")->selected_peer, "evse_local");
  EXPECT_EQ(r.outcome.session("victim")->phase, Phase::Authorized);
  EXPECT_NE(r.outcome.session("attacker_ev")->phase, Phase::Authorized);
  EXPECT_TRUE(failures(c, r).empty()) << describe(failures(c, r));
}

TEST(Scenarios, SdpHardeningVariants) {
  auto multi = run("sdp-hardened");
  EXPECT_EQ(multi.outcome.session("victim")->stop_cause, "SdpMultiResponse");

  auto c = builtin_scenario("sdp-hardened");
  c.sdp_hardening = {false, true};
  auto consistency = run_scenario(c);
  EXPECT_EQ(consistency.outcome.session("victim")->stop_cause, "MacIpMismatch");
  EXPECT_TRUE(consistency.outcome.has_flag(DetectorFlag::MacIpMismatch));
  EXPECT_TRUE(failures(c, consistency).empty());
}

TEST(Scenarios, OobAuthorizesWithoutContractMessages) {
  auto r = run("oob-auth");
  EXPECT_EQ(r.outcome.session("evse")->authorized_by, "backend");
  EXPECT_EQ(r.outcome.session("ev")->phase, Phase::Authorized);
  ASSERT_EQ(r.outcome.remote_starts.size(), 1u);
  EXPECT_EQ(r.outcome.remote_starts[0].station_id, std::string(kTargetStation));
  for (const auto& m : wire_messages(r.transcript)) {
    const auto n = name_of(m.message);
    EXPECT_EQ(n.find("PaymentDetails"), std::string::npos);
    EXPECT_EQ(n.find("Authorization"), std::string::npos);
  }
}

TEST(Scenarios, OobRelayNeverAuthorizesTargetStation) {
  auto r = run("oob-relay-attempt");
  EXPECT_NE(r.outcome.session("evse")->phase, Phase::Authorized);
  ASSERT_EQ(r.outcome.remote_starts.size(), 1u);
  EXPECT_EQ(r.outcome.remote_starts[0].station_id, std::string(kCompromisedStation));
  EXPECT_EQ(r.outcome.remote_starts[0].contract_id, std::string(kVictimContract));
  EXPECT_FALSE(r.outcome.energy_billed_to.has_value());
}

// ---------------------------------------------------------------- properties

TEST(ScenarioProperties, SameSeedSameTranscript) {
  for (const auto& b : builtin_scenarios()) {
    auto c = builtin_scenario(b.name);
    c.seed = 42;
    EXPECT_EQ(run_scenario(c).transcript.to_jsonl(), run_scenario(c).transcript.to_jsonl()) << b.name;
  }
}

TEST(ScenarioProperties, SeedChangesRandomness) {
  auto a = builtin_scenario("relay-baseline");
  auto b = a;
  b.seed = 2;
  auto ra = run_scenario(a);
  auto rb = run_scenario(b);
  EXPECT_NE(ra.transcript.to_jsonl(), rb.transcript.to_jsonl());
  EXPECT_NE(*ra.outcome.session("evse")->challenge, *rb.outcome.session("evse")->challenge);
  EXPECT_EQ(ra.outcome.session("attacker_ev")->phase, rb.outcome.session("attacker_ev")->phase);
}

TEST(ScenarioProperties, BaselineOutcomeInvariantToRelayLatency) {
  for (Nanos ms : {0, 1, 10, 50, 200, 500, 1000, 2000}) {
    auto c = builtin_scenario("relay-baseline");
    c.relay_latency = ms * kMillisecond;
    auto r = run_scenario(c);
    EXPECT_EQ(r.outcome.session("attacker_ev")->phase, Phase::Authorized) << ms;
    EXPECT_EQ(r.outcome.energy_billed_to, std::string(kVictimContract)) << ms;
  }
}

TEST(ScenarioProperties, VictimTimesOutWhenRelayIsTooSlow) {
  auto c = builtin_scenario("relay-baseline");
  c.relay_latency = 2500 * kMillisecond;  // round trip 5004 ms exceeds 5 s
  auto r = run_scenario(c);
  EXPECT_EQ(expect(c).stage, Expectation::Stage::VictimTimeout);
  EXPECT_NE(r.outcome.session("attacker_ev")->phase, Phase::Authorized);
  EXPECT_TRUE(failures(c, r).empty()) << describe(failures(c, r));
}

TEST(ScenarioProperties, RelayInvariantsAcrossSeedsAndPolicies) {
  const std::vector<std::string> policies{"none", "station-bound", "timing:200", "timing:2000",
                                          "station-bound+timing:2000"};
  for (const auto& base : {"relay-baseline", "relay-compromised-target", "sdp-spoof"}) {
    for (const auto& pol : policies) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto c = builtin_scenario(base);
        c.policy = parse_policy(pol);
        c.seed = seed;
        auto r = run_scenario(c);
        const auto& o = r.outcome;
        const std::string tag = std::string(base) + " " + pol + " seed " + std::to_string(seed);
        EXPECT_NE(o.session("victim")->phase, Phase::Authorized) << tag;
        EXPECT_EQ(*o.session("evse")->challenge, *o.session("victim")->challenge) << tag;
        EXPECT_TRUE(failures(c, r).empty()) << tag << ": " << describe(failures(c, r));
      }
    }
  }
}

TEST(ScenarioProperties, MitigationAndSuccessAreExclusive) {
  struct Single {
    const char* base;
    void (*apply)(ScenarioConfig&);
  };
  const std::vector<Single> configs{
      {"relay-baseline", [](ScenarioConfig&) {}},
      {"relay-baseline", [](ScenarioConfig& c) { c.policy.binding = pnc::Binding::StationIdBound; }},
      {"relay-baseline", [](ScenarioConfig& c) { c.policy.timing_threshold = 200 * kMillisecond; }},
      {"relay-baseline", [](ScenarioConfig& c) { c.geo_threshold_m = 500.0; }},
      {"sdp-spoof", [](ScenarioConfig& c) { c.sdp_hardening.multi_response_abort = true; }},
      {"sdp-spoof", [](ScenarioConfig& c) { c.sdp_hardening.mac_ip_consistency = true; }},
  };
  for (const auto& s : configs) {
    auto c = builtin_scenario(s.base);
    s.apply(c);
    auto r = run_scenario(c);
    const bool authorized = r.outcome.session("attacker_ev")->phase == Phase::Authorized;
    const bool bound_rejection = r.outcome.session("evse")->decision == AuthorizationCode::BindingMismatch;
    const int signals = static_cast<int>(r.outcome.flags.size()) + (bound_rejection ? 1 : 0);
    EXPECT_EQ(signals + (authorized ? 1 : 0), 1) << config_to_json(c).dump();
  }
}

TEST(ScenarioProperties, BilledOnlyWhenAuthorized) {
  for (const auto& b : builtin_scenarios()) {
    auto r = run(b.name);
    if (!r.outcome.energy_billed_to) continue;
    bool any = false;
    for (const auto& s : r.outcome.sessions) any = any || s.phase == Phase::Authorized;
    EXPECT_TRUE(any) << b.name;
  }
}

TEST(ScenarioProperties, PhaseTimesFollowArrowOrder) {
  for (const auto& b : builtin_scenarios()) {
    auto r = run(b.name);
    for (const auto& s : r.outcome.sessions) {
      for (std::size_t i = 1; i < s.phase_times.size(); ++i) {
        EXPECT_TRUE(is_forward(s.phase_times[i - 1].first, s.phase_times[i].first))
            << b.name << " " << s.actor << " " << phase_name(s.phase_times[i - 1].first) << " -> "
            << phase_name(s.phase_times[i].first);
        EXPECT_LE(s.phase_times[i - 1].second, s.phase_times[i].second);
      }
    }
  }
}

TEST(ScenarioProperties, FramePayloadsReparse) {
  for (const auto& b : builtin_scenarios()) {
    auto r = run(b.name);
    for (const auto& e : r.transcript.events()) {
      if (e.kind != simnet::EventKind::FrameSent) continue;
      auto frame = wire::parse_v2gtp(from_hex(e.detail["payload"].get<std::string>()));
      switch (frame.payload_type) {
        case wire::kPayloadV2gMessage:
          EXPECT_NO_THROW(wire::decode_tlv(frame.payload)) << b.name;
          break;
        case wire::kPayloadSdpRequest:
          EXPECT_NO_THROW(wire::decode_sdp_request(frame.payload)) << b.name;
          break;
        case wire::kPayloadSdpResponse:
          EXPECT_NO_THROW(wire::decode_sdp_response(frame.payload)) << b.name;
          break;
        case wire::kPayloadSlacMatch:
          EXPECT_NO_THROW(wire::decode_slac_match(frame.payload)) << b.name;
          break;
        default:
          EXPECT_EQ(frame.payload_type, wire::kPayloadHandshake) << b.name;
      }
    }
  }
}

TEST(ScenarioProperties, KeylogOneLinePerChannel) {
  auto r = run("relay-baseline");
  ASSERT_EQ(r.outcome.keylog.size(), 2u);  // victim and attacker vehicle
  EXPECT_NE(r.outcome.keylog[0], r.outcome.keylog[1]);
  for (const auto& line : r.outcome.keylog) EXPECT_EQ(line.rfind("CLIENT_RANDOM ", 0), 0u);
}

// ---------------------------------------------------------------- channel variants

TEST(ScenarioVariants, MutualAuthRelayStillWorks) {
  auto c = builtin_scenario("relay-baseline");
  c.channel_mode = channel::Mode::MutualAuth;
  auto r = run_scenario(c);
  EXPECT_EQ(r.outcome.session("attacker_ev")->phase, Phase::Authorized);
  EXPECT_TRUE(failures(c, r).empty());
}

TEST(ScenarioVariants, PlainChannelRefusesContractPayment) {
  auto c = builtin_scenario("benign");
  c.channel_mode = channel::Mode::Plain;
  auto r = run_scenario(c);
  EXPECT_EQ(r.outcome.session("ev")->authorized_by, "external");
  EXPECT_TRUE(r.outcome.keylog.empty());
  EXPECT_TRUE(failures(c, r).empty()) << describe(failures(c, r));
}

TEST(ScenarioVariants, UntrustedOrRevokedFakeCredential) {
  auto rogue = builtin_scenario("relay-baseline");
  rogue.fake_credential = std::string(kRogueStation);
  auto r1 = run_scenario(rogue);
  EXPECT_EQ(r1.outcome.session("victim")->stop_cause, "ChainInvalid: UnknownRoot");
  EXPECT_TRUE(failures(rogue, r1).empty());

  auto revoked = builtin_scenario("relay-baseline");
  revoked.revoked = {std::string(kCompromisedStation)};
  auto r2 = run_scenario(revoked);
  EXPECT_EQ(r2.outcome.session("victim")->stop_cause, "ChainInvalid: Revoked");
  EXPECT_TRUE(failures(revoked, r2).empty());
}

TEST(ScenarioVariants, RevokedContractRejectedAtStation) {
  auto c = builtin_scenario("relay-baseline");
  c.revoked = {std::string(kVictimContract)};
  auto r = run_scenario(c);
  EXPECT_EQ(r.outcome.session("evse")->decision, AuthorizationCode::ChainInvalid);
  EXPECT_TRUE(failures(c, r).empty());
}

TEST(ScenarioVariants, ExpiredStationCertificate) {
  auto c = builtin_scenario("benign");
  c.expired = {std::string(kTargetStation)};
  auto r = run_scenario(c);
  EXPECT_EQ(r.outcome.session("ev")->stop_cause, "ChainInvalid: Expired");
  EXPECT_TRUE(failures(c, r).empty());
}

// ---------------------------------------------------------------- config

TEST(Config, PolicyText) {
  EXPECT_EQ(parse_policy("none"), pnc::AuthorizationPolicy{});
  EXPECT_EQ(parse_policy("station-bound").binding, pnc::Binding::StationIdBound);
  EXPECT_EQ(parse_policy("timing:200").timing_threshold, 200 * kMillisecond);
  EXPECT_EQ(parse_policy("timing:0.5ms").timing_threshold, 500'000);
  auto both = parse_policy("station-bound+timing:150");
  EXPECT_EQ(both.binding, pnc::Binding::StationIdBound);
  EXPECT_EQ(both.timing_threshold, 150 * kMillisecond);
  for (const char* bad : {"", "bound", "timing:", "timing:-1", "timing:0", "timing:abc", "station-bound+", "none+"}) {
    EXPECT_THROW(parse_policy(bad), ConfigError) << bad;
  }
}

TEST(Config, JsonOverridesBase) {
  auto c = config_from_json(nlohmann::json::parse(R"({
    "base": "relay-baseline",
    "seed": 9,
    "policy": "station-bound",
    "relay_latency_ms": 50,
    "geo_threshold_m": 750,
    "sdp_hardening": {"mac_ip_consistency": true},
    "target_offers": ["ExternalPayment", "ContractCertificate"],
    "victim_position": {"latitude": 1.5, "longitude": 2.5}
  })"));
  EXPECT_EQ(c.name, "relay-baseline");
  EXPECT_EQ(c.topology, Topology::Relay);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.policy.binding, pnc::Binding::StationIdBound);
  EXPECT_EQ(c.relay_latency, 50 * kMillisecond);
  EXPECT_EQ(c.geo_threshold_m, 750.0);
  EXPECT_TRUE(c.sdp_hardening.mac_ip_consistency);
  EXPECT_FALSE(c.sdp_hardening.multi_response_abort);
  EXPECT_EQ(c.target_offers.front(), PaymentOption::ExternalPayment);
  EXPECT_EQ(c.victim_position, (pki::GeoPoint{1.5, 2.5}));
}

TEST(Config, JsonRoundTrip) {
  for (const auto& b : builtin_scenarios()) {
    auto c = builtin_scenario(b.name);
    auto back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
    EXPECT_EQ(config_to_json(back).dump(), config_to_json(c).dump()) << b.name;
  }
}

TEST(Config, ErrorsCarryFieldPath) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {R"({"base": "nope"})", "base"},
      {R"({"seed": "x"})", "seed"},
      {R"({"seed": -1})", "seed"},
      {R"({"bogus": 1})", "bogus"},
      {R"({"relay_latency_ms": -5})", "relay_latency_ms"},
      {R"({"policy": {"binding": "maybe"}})", "policy.binding"},
      {R"({"policy": {"timing_threshold_ms": 0}})", "policy.timing_threshold_ms"},
      {R"({"sdp_hardening": {"multi_response_abort": 1}})", "sdp_hardening.multi_response_abort"},
      {R"({"target_offers": ["Cash"]})", "target_offers[0]"},
      {R"({"target_offers": []})", "target_offers"},
      {R"({"fake_credential": "DE*XXX*E999"})", "fake_credential"},
      {R"({"revoked": ["DE-VIC-000001", "ghost"]})", "revoked[1]"},
      {R"({"vehicle_trust_roots": ["Nobody"]})", "vehicle_trust_roots[0]"},
      {R"({"victim_position": {"latitude": 91, "longitude": 0}})", "victim_position"},
      {R"({"victim_position": {"latitude": 1}})", "victim_position"},
      {R"({"geo_threshold_m": -3})", "geo_threshold_m"},
      {R"({"topology": "mesh"})", "topology"},
      {R"({"channel_mode": "TLS13"})", "channel_mode"},
      {R"({"base": "sdp-spoof", "spoof_latency_ms": 3})", "spoof_latency_ms"},
      {R"([1, 2])", "$"},
  };
  for (const auto& [doc, field] : cases) {
    try {
      config_from_json(nlohmann::json::parse(doc));
      ADD_FAILURE() << doc;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.field(), field) << doc << " -> " << e.what();
    }
  }
}

// ---------------------------------------------------------------- frozen vectors

std::map<std::string, std::string> read_certificates() {
  std::ifstream in(std::string(PNCSIM_VECTOR_DIR) + "/fixture_certificates.txt");
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

TEST(FixtureVectors, CertificatesMatchFrozenEncoding) {
  const auto frozen = read_certificates();
  ASSERT_FALSE(frozen.empty());
  const auto fx = build_fixtures(ScenarioConfig{});
  for (const auto& [name, cert] : fx.roots) {
    EXPECT_EQ(frozen.at("root " + name), to_hex(pki::encode_certificate(cert))) << name;
  }
  for (const auto& [name, cred] : fx.stations) {
    EXPECT_EQ(frozen.at("station " + name), to_hex(pki::encode_certificate(cred.certificate))) << name;
  }
  for (const auto& [name, cred] : fx.contracts) {
    EXPECT_EQ(frozen.at("contract " + name), to_hex(pki::encode_certificate(cred.certificate))) << name;
    ASSERT_EQ(cred.chain.size(), 1u);
    EXPECT_EQ(frozen.at("chain " + name), to_hex(pki::encode_certificate(cred.chain[0]))) << name;
  }
}

TEST(FixtureVectors, CompromisedStationCoordinatesTenKilometresNorth) {
  ScenarioConfig c;
  const auto fx = build_fixtures(c);
  const auto& geo = *fx.stations.at(std::string(kCompromisedStation)).certificate.geo;
  EXPECT_NEAR(pki::geo_distance(geo, c.victim_position), 10'000.0, 1e-6);
  EXPECT_EQ(*fx.stations.at(std::string(kLocalStation)).certificate.geo, c.victim_position);
}

struct Tuple {
  std::string name;
  std::map<std::string, std::string> fields;
};

std::pair<std::map<std::string, std::string>, std::vector<Tuple>> read_tuples() {
  std::ifstream in(std::string(PNCSIM_VECTOR_DIR) + "/pnc_tuples.txt");
  std::map<std::string, std::string> common;
  std::vector<Tuple> tuples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      tuples.push_back(Tuple{line.substr(1, line.size() - 2), {}});
      continue;
    }
    const auto eq = line.find(" = ");
    auto& target = tuples.empty() ? common : tuples.back().fields;
    target[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return {common, tuples};
}

TEST(FixtureVectors, AuthorizationTuples) {
  const auto certs = read_certificates();
  const auto [common, tuples] = read_tuples();
  ASSERT_EQ(tuples.size(), 7u);
  const auto contract = pki::decode_certificate(from_hex(certs.at("contract " + common.at("contract"))));
  const std::vector<pki::Certificate> chain{pki::decode_certificate(from_hex(certs.at("chain " + common.at("contract"))))};
  const auto root = pki::decode_certificate(from_hex(certs.at("root MO-Root")));
  pnc::Challenge challenge;
  const auto ch = from_hex(common.at("challenge"));
  std::copy(ch.begin(), ch.end(), challenge.bytes.begin());

  // The fixture signer reproduces the frozen signatures bit for bit.
  const auto fx = build_fixtures(ScenarioConfig{});
  const auto& cred = fx.contracts.at(common.at("contract"));

  for (const auto& t : tuples) {
    pnc::VerifierContext ctx;
    ctx.trust_roots = {root};
    ctx.now_seconds = ScenarioConfig{}.epoch;
    ctx.policy = parse_policy(t.fields.at("policy"));
    ctx.station_id = common.at("station");
    pki::Signature sig{};
    const auto bytes = from_hex(t.fields.at("signature"));
    ASSERT_EQ(bytes.size(), sig.size());
    std::copy(bytes.begin(), bytes.end(), sig.begin());
    const Nanos received = std::stoll(t.fields.at("t_received_ms")) * kMillisecond;
    auto d = pnc::verify_authorization(contract, chain, challenge, challenge, sig, ctx, 0, received);
    EXPECT_EQ(wire::authorization_code_name(d.code), t.fields.at("verdict")) << t.name;

    const bool reproducible =
        sig == pnc::sign_challenge(cred, challenge, std::nullopt) ||
        sig == pnc::sign_challenge(cred, challenge, std::string_view(kCompromisedStation)) ||
        sig == pnc::sign_challenge(cred, challenge, std::string_view(kTargetStation));
    EXPECT_TRUE(reproducible) << t.name;
  }
}

// ---------------------------------------------------------------- outcome JSON

TEST(Outcome, JsonSummary) {
  auto r = run("relay-baseline");
  auto j = r.outcome.to_json();
  EXPECT_EQ(j["energy_billed_to"], std::string(kVictimContract));
  EXPECT_EQ(j["sessions"][0]["actor"], "victim");
  EXPECT_EQ(j["sessions"][1]["phase"], "Authorized");
  EXPECT_TRUE(j["flags"].empty());
  EXPECT_TRUE(j["quiescent"].get<bool>());
}

}  // namespace
}  // namespace pncsim::actors
