// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pncsim/actors/agents.hpp"

namespace pncsim::actors {

/// Invalid scenario configuration; `field()` is a dotted path such as
/// "latency_ms.relay".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Which actors are attached and how they are wired.
///   Benign    vehicle "ev" at the regular station "evse".
///   Relay     victim at fake station (cable A), relay vehicle at "evse" (cable B).
///   SdpSpoof  as Relay, but the victim's cable also carries a legitimate
///             station "evse_local"; the fake listens to SLAC and spoofs its IPv6.
///   OobAuth   as Benign, authorization through the manufacturer backend.
///   OobRelay  as Relay, with backend authorization instead of contract signatures.
enum class Topology { Benign, Relay, SdpSpoof, OobAuth, OobRelay };

std::string_view topology_name(Topology topology);

// Fixture names.
inline constexpr std::string_view kTargetStation = "DE*ICE*E001";
inline constexpr std::string_view kCompromisedStation = "DE*ICE*E002";
inline constexpr std::string_view kLocalStation = "DE*ICE*E003";
inline constexpr std::string_view kRogueStation = "DE*EVL*E666";
inline constexpr std::string_view kVictimContract = "DE-VIC-000001";
inline constexpr std::string_view kAttackerContract = "DE-ATK-000002";
inline constexpr std::string_view kVictimToken = "TOKEN-VICTIM";
inline constexpr std::string_view kAttackerToken = "TOKEN-ATTACKER";
inline constexpr std::string_view kV2gRoot = "V2G-Root";
inline constexpr std::string_view kMoRoot = "MO-Root";
inline constexpr std::string_view kOemRoot = "OEM-Root";
inline constexpr std::string_view kRogueRoot = "Rogue-Root";

struct ScenarioConfig {
  std::string name = "custom";
  std::string description;
  Topology topology = Topology::Benign;
  std::uint64_t seed = 1;
  std::uint64_t fixture_seed = 0x5043;
  std::int64_t epoch = 1767225600;  // 2026-01-01T00:00:00Z

  pnc::AuthorizationPolicy policy;
  channel::Mode channel_mode = channel::Mode::ServerAuth;
  std::optional<double> geo_threshold_m;  // vehicles check station coordinates when set
  SdpHardening sdp_hardening;

  Nanos link_latency = 1 * kMillisecond;
  Nanos relay_latency = 500 * kMillisecond;
  Nanos spoof_latency = 1 * kMillisecond;  // victim <-> fake station
  Nanos local_latency = 3 * kMillisecond;  // victim <-> legitimate local station
  Nanos oob_latency = 50 * kMillisecond;

  Nanos response_timeout = 2 * kSecond;
  Nanos payment_details_timeout = 5 * kSecond;
  Nanos sequence_timeout = 60 * kSecond;
  Nanos relay_timeout = 60 * kSecond;
  Nanos sdp_window = 20 * kMillisecond;
  Nanos horizon = 600 * kSecond;

  std::string fake_credential = std::string(kCompromisedStation);
  std::vector<wire::PaymentOption> target_offers{wire::PaymentOption::ContractCertificate,
                                                 wire::PaymentOption::ExternalPayment};
  std::vector<std::string> vehicle_trust_roots{std::string(kV2gRoot)};
  std::vector<std::string> contract_trust_roots{std::string(kMoRoot)};
  std::vector<std::string> revoked;
  std::vector<std::string> expired;

  pki::GeoPoint target_position{48.7665, 11.4258};
  pki::GeoPoint victim_position{52.5200, 13.4050};
  double compromised_offset_m = 10'000.0;  // compromised station certificate vs victim position
};

/// Deterministic PKI material for a config (depends on fixture_seed, epoch,
/// positions and the expired list only).
struct Fixtures {
  std::map<std::string, pki::Certificate> roots;
  std::map<std::string, pki::Credential> stations;
  std::map<std::string, pki::Credential> contracts;
  std::map<std::string, pki::Credential> vehicles;
  std::map<std::string, std::string> station_root;  // station id -> anchor name
};

Fixtures build_fixtures(const ScenarioConfig& config);

/// Throws ConfigError for out-of-range values and unknown fixture names.
void validate(const ScenarioConfig& config);

struct BuiltinScenario {
  std::string name;
  std::string description;
};

const std::vector<BuiltinScenario>& builtin_scenarios();

/// Throws ConfigError{"base"} for unknown names.
ScenarioConfig builtin_scenario(std::string_view name);

/// Declarative form: {"base": "<builtin>", ...overrides}. Field names are
/// documented in the README. Throws ConfigError with the offending path.
ScenarioConfig config_from_json(const nlohmann::json& document);
nlohmann::ordered_json config_to_json(const ScenarioConfig& config);

/// Accepts "none", "station-bound", "timing:<ms>" and "station-bound+timing:<ms>".
pnc::AuthorizationPolicy parse_policy(std::string_view text);

struct Outcome {
  std::vector<SessionReport> sessions;
  std::vector<std::string> flags;  // distinct, in order raised
  std::optional<std::string> energy_billed_to;
  std::vector<RemoteStartRecord> remote_starts;
  std::vector<std::string> keylog;
  Nanos duration = 0;
  bool quiescent = true;  // false when the horizon cut the run short

  const SessionReport* session(std::string_view actor) const;
  bool has_flag(DetectorFlag flag) const;
  nlohmann::ordered_json to_json() const;
};

struct ScenarioResult {
  simnet::Transcript transcript;
  Outcome outcome;
};

/// Builds network, fixtures and actors, then steps to quiescence or the
/// configured horizon.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// What the configuration implies, computed from config values alone.
struct Expectation {
  enum class Stage { Completed, SdpAborted, HandshakeFailed, PaymentUnavailable, VictimTimeout };
  Stage stage = Stage::Completed;
  std::optional<DetectorFlag> flag;
  std::string handshake_failure;  // "GeoMismatch", "ChainInvalid: UnknownRoot", ...
  std::string selected_peer;      // actor name, SdpSpoof only
  std::optional<wire::AuthorizationCode> code;  // contract decision at the regular station
  std::string authorized_by;                    // benign topologies
  std::optional<std::string> billed_to;
  std::optional<std::string> remote_start_at;
  Nanos relay_round_trip = 0;
  std::string summary;
};

Expectation expect(const ScenarioConfig& config);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> check_expectation(const ScenarioConfig& config, const Expectation& expectation,
                                           const ScenarioResult& result);

inline bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

/// Application messages seen on the wire (FrameSent events).
struct WireMessage {
  Nanos t = 0;
  std::string from;
  std::string to;
  wire::V2gMessage message;
};

std::vector<WireMessage> wire_messages(const simnet::Transcript& transcript);

}  // namespace pncsim::actors
