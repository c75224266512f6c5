// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/actors/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

namespace pncsim::actors {

namespace {

constexpr std::int64_t kYear = 365 * 24 * 3600;

constexpr Mac kEvMac{0x02, 0x00, 0x00, 0x00, 0x0B, 0x01};
constexpr Mac kTargetMac{0x02, 0x00, 0x00, 0x00, 0x0B, 0x0E};
constexpr Mac kVictimMac{0x02, 0x00, 0x00, 0x00, 0x0A, 0x01};
constexpr Mac kLocalMac{0x02, 0x00, 0x00, 0x00, 0x0A, 0x0E};
constexpr Mac kFakeMac{0x02, 0x00, 0x00, 0x00, 0x0A, 0x0F};

constexpr int kCableA = 0;
constexpr int kCableB = 1;

const char* const kVictimVehicle = "VIN-VICTIM";
const char* const kAttackerVehicle = "VIN-ATTACKER";

bool contains(const std::vector<std::string>& list, std::string_view item) {
  return std::find(list.begin(), list.end(), item) != list.end();
}

bool offers(const std::vector<wire::PaymentOption>& list, wire::PaymentOption option) {
  return std::find(list.begin(), list.end(), option) != list.end();
}

bool relay_topology(Topology t) { return t == Topology::Relay || t == Topology::SdpSpoof; }

std::string ms_text(Nanos ns) {
  std::ostringstream out;
  out << static_cast<double>(ns) / static_cast<double>(kMillisecond) << " ms";
  return out.str();
}

}  // namespace

std::string_view topology_name(Topology topology) {
  switch (topology) {
    case Topology::Benign:
      return "benign";
    case Topology::Relay:
      return "relay";
    case Topology::SdpSpoof:
      return "sdp-spoof";
    case Topology::OobAuth:
      return "oob-auth";
    case Topology::OobRelay:
      return "oob-relay";
  }
  return "unknown";
}

// ---------------------------------------------------------------- fixtures

Fixtures build_fixtures(const ScenarioConfig& config) {
  DeterministicRng rng(config.fixture_seed);
  const pki::Validity valid{config.epoch - kYear, config.epoch + kYear};
  const pki::Validity lapsed{config.epoch - 2 * kYear, config.epoch - 24 * 3600};
  auto window = [&](const std::string& subject) { return contains(config.expired, subject) ? lapsed : valid; };

  Fixtures fx;
  auto v2g_root = pki::generate_authority(std::string(kV2gRoot), pki::Role::Root, nullptr, valid, rng);
  auto cpo = pki::generate_authority("CPO-Sub", pki::Role::IntermediateCA, &v2g_root, valid, rng);
  auto mo_root = pki::generate_authority(std::string(kMoRoot), pki::Role::Root, nullptr, valid, rng);
  auto mo = pki::generate_authority("MO-Sub", pki::Role::IntermediateCA, &mo_root, valid, rng);
  auto oem_root = pki::generate_authority(std::string(kOemRoot), pki::Role::Root, nullptr, valid, rng);
  auto rogue_root = pki::generate_authority(std::string(kRogueRoot), pki::Role::Root, nullptr, valid, rng);

  auto station = [&](pki::Authority& ca, std::string_view id, const pki::GeoPoint& where, std::string_view root) {
    const std::string name(id);
    fx.stations.emplace(name, pki::issue_leaf(ca, name, pki::Role::StationLeaf, window(name), where, rng));
    fx.station_root.emplace(name, std::string(root));
  };
  station(cpo, kTargetStation, config.target_position, kV2gRoot);
  station(cpo, kCompromisedStation, pki::offset_north(config.victim_position, config.compromised_offset_m), kV2gRoot);
  station(cpo, kLocalStation, config.victim_position, kV2gRoot);
  station(rogue_root, kRogueStation, config.victim_position, kRogueRoot);

  for (auto id : {kVictimContract, kAttackerContract}) {
    const std::string name(id);
    fx.contracts.emplace(name, pki::issue_leaf(mo, name, pki::Role::ContractLeaf, window(name), std::nullopt, rng));
  }
  for (const char* id : {kVictimVehicle, kAttackerVehicle}) {
    fx.vehicles.emplace(id, pki::issue_leaf(oem_root, id, pki::Role::VehicleLeaf, window(id), std::nullopt, rng));
  }

  fx.roots.emplace(std::string(kV2gRoot), v2g_root.certificate);
  fx.roots.emplace(std::string(kMoRoot), mo_root.certificate);
  fx.roots.emplace(std::string(kOemRoot), oem_root.certificate);
  fx.roots.emplace(std::string(kRogueRoot), rogue_root.certificate);
  return fx;
}

// ---------------------------------------------------------------- validation

void validate(const ScenarioConfig& c) {
  auto non_negative = [](const char* field, Nanos v) {
    if (v < 0) throw ConfigError(field, "must not be negative");
  };
  auto positive = [](const char* field, Nanos v) {
    if (v <= 0) throw ConfigError(field, "must be positive");
  };
  non_negative("link_latency_ms", c.link_latency);
  non_negative("relay_latency_ms", c.relay_latency);
  non_negative("spoof_latency_ms", c.spoof_latency);
  non_negative("local_latency_ms", c.local_latency);
  non_negative("oob_latency_ms", c.oob_latency);
  positive("response_timeout_ms", c.response_timeout);
  positive("payment_details_timeout_ms", c.payment_details_timeout);
  positive("sequence_timeout_ms", c.sequence_timeout);
  positive("relay_timeout_ms", c.relay_timeout);
  positive("sdp_window_ms", c.sdp_window);
  positive("horizon_ms", c.horizon);
  if (c.policy.timing_threshold && *c.policy.timing_threshold <= 0) {
    throw ConfigError("policy.timing_threshold_ms", "must be positive");
  }
  if (c.geo_threshold_m && !(std::isfinite(*c.geo_threshold_m) && *c.geo_threshold_m > 0)) {
    throw ConfigError("geo_threshold_m", "must be a positive number");
  }
  if (!std::isfinite(c.compromised_offset_m) || c.compromised_offset_m < 0 ||
      c.compromised_offset_m > 1'000'000.0) {
    throw ConfigError("compromised_offset_m", "must be within [0, 1000000]");
  }
  if (!pki::is_valid(c.target_position)) throw ConfigError("target_position", "invalid coordinates");
  if (!pki::is_valid(c.victim_position)) throw ConfigError("victim_position", "invalid coordinates");
  if (c.target_offers.empty()) throw ConfigError("target_offers", "at least one payment option is required");
  if (c.topology == Topology::SdpSpoof && c.spoof_latency == c.local_latency) {
    throw ConfigError("spoof_latency_ms", "must differ from local_latency_ms so the SDP race has a winner");
  }

  const std::set<std::string> stations{std::string(kTargetStation), std::string(kCompromisedStation),
                                       std::string(kLocalStation), std::string(kRogueStation)};
  const std::set<std::string> roots{std::string(kV2gRoot), std::string(kMoRoot), std::string(kOemRoot),
                                    std::string(kRogueRoot)};
  std::set<std::string> leaves = stations;
  leaves.insert({std::string(kVictimContract), std::string(kAttackerContract), kVictimVehicle, kAttackerVehicle});

  if (!stations.count(c.fake_credential)) throw ConfigError("fake_credential", "unknown station credential '" + c.fake_credential + "'");
  auto check_list = [](const char* field, const std::vector<std::string>& list, const std::set<std::string>& known) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!known.count(list[i])) {
        throw ConfigError(std::string(field) + "[" + std::to_string(i) + "]", "unknown fixture '" + list[i] + "'");
      }
    }
  };
  check_list("vehicle_trust_roots", c.vehicle_trust_roots, roots);
  check_list("contract_trust_roots", c.contract_trust_roots, roots);
  check_list("revoked", c.revoked, leaves);
  check_list("expired", c.expired, leaves);
}

// ---------------------------------------------------------------- built-ins

namespace {

struct Builtin {
  BuiltinScenario info;
  Topology topology;
  void (*tune)(ScenarioConfig&);
};

const std::vector<Builtin>& builtins() {
  using wire::PaymentOption;
  static const std::vector<Builtin> table = {
      {{"benign", "Vehicle authorizes at the regular station with its own contract certificate."},
       Topology::Benign,
       [](ScenarioConfig&) {}},
      {{"external-payment", "Station offers only external payment; no contract certificate or signature is sent."},
       Topology::Benign,
       [](ScenarioConfig& c) { c.target_offers = {PaymentOption::ExternalPayment}; }},
      {{"relay-baseline",
        "Fake station relays the victim's certificate, challenge and signature; the attacker charges on the "
        "victim's contract."},
       Topology::Relay,
       [](ScenarioConfig&) {}},
      {{"relay-bound-sig", "Relay against station-bound signatures: the victim signs for the fake station's id."},
       Topology::Relay,
       [](ScenarioConfig& c) { c.policy.binding = pnc::Binding::StationIdBound; }},
      {{"relay-timing", "Relay against a 200 ms signature timing guard with 500 ms relay latency."},
       Topology::Relay,
       [](ScenarioConfig& c) {
         c.policy.timing_threshold = 200 * kMillisecond;
         c.relay_latency = 500 * kMillisecond;
       }},
      {{"relay-compromised-target",
        "Fake station uses the target station's own leaked credential, so station binding cannot help."},
       Topology::Relay,
       [](ScenarioConfig& c) {
         c.policy.binding = pnc::Binding::StationIdBound;
         c.fake_credential = std::string(kTargetStation);
       }},
      {{"sdp-spoof", "Attacker on the victim's cable answers SDP first with a spoofed address and wins."},
       Topology::SdpSpoof,
       [](ScenarioConfig&) {}},
      {{"sdp-hardened", "Same race with the vehicle aborting when several stations answer SDP."},
       Topology::SdpSpoof,
       [](ScenarioConfig& c) { c.sdp_hardening.multi_response_abort = true; }},
      {{"geo-mismatch", "Vehicle rejects a station certificate whose coordinates are 10 km away (500 m limit)."},
       Topology::Relay,
       [](ScenarioConfig& c) {
         c.geo_threshold_m = 500.0;
         c.compromised_offset_m = 10'000.0;
       }},
      {{"oob-auth", "Manufacturer backend starts the session at the station the vehicle is connected to."},
       Topology::OobAuth,
       [](ScenarioConfig& c) { c.target_offers = {PaymentOption::ExternalPayment}; }},
      {{"oob-relay-attempt",
        "Relay setup against backend authorization: the remote start lands at the compromised station's id."},
       Topology::OobRelay,
       [](ScenarioConfig& c) { c.target_offers = {PaymentOption::ExternalPayment}; }},
  };
  return table;
}

}  // namespace

const std::vector<BuiltinScenario>& builtin_scenarios() {
  static const std::vector<BuiltinScenario> list = [] {
    std::vector<BuiltinScenario> out;
    for (const auto& b : builtins()) out.push_back(b.info);
    return out;
  }();
  return list;
}

ScenarioConfig builtin_scenario(std::string_view name) {
  for (const auto& b : builtins()) {
    if (b.info.name != name) continue;
    ScenarioConfig c;
    c.name = b.info.name;
    c.description = b.info.description;
    c.topology = b.topology;
    b.tune(c);
    return c;
  }
  throw ConfigError("base", "unknown scenario '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- policy text

pnc::AuthorizationPolicy parse_policy(std::string_view text) {
  pnc::AuthorizationPolicy policy;
  if (text == "none") return policy;
  std::string_view rest = text;
  constexpr std::string_view kBound = "station-bound";
  if (rest.substr(0, kBound.size()) == kBound) {
    policy.binding = pnc::Binding::StationIdBound;
    rest.remove_prefix(kBound.size());
    if (rest.empty()) return policy;
    if (rest.front() != '+') throw ConfigError("policy", "unrecognized policy '" + std::string(text) + "'");
    rest.remove_prefix(1);
  }
  constexpr std::string_view kTiming = "timing:";
  if (rest.substr(0, kTiming.size()) != kTiming) {
    throw ConfigError("policy", "unrecognized policy '" + std::string(text) + "'");
  }
  rest.remove_prefix(kTiming.size());
  if (rest.size() > 2 && rest.substr(rest.size() - 2) == "ms") rest.remove_suffix(2);
  double ms = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), ms);
  if (ec != std::errc{} || ptr != rest.data() + rest.size() || !(ms > 0) || !std::isfinite(ms)) {
    throw ConfigError("policy", "timing threshold must be a positive number of milliseconds");
  }
  policy.timing_threshold = static_cast<Nanos>(std::llround(ms * static_cast<double>(kMillisecond)));
  return policy;
}

// ---------------------------------------------------------------- JSON config

namespace {

using nlohmann::json;

[[noreturn]] void type_error(const std::string& path, const char* expected) {
  throw ConfigError(path, std::string("expected ") + expected);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) type_error(path, "a number");
  return v.get<double>();
}

Nanos millis(const json& v, const std::string& path) {
  const double ms = number(v, path);
  if (!std::isfinite(ms) || std::fabs(ms) > 1e9) throw ConfigError(path, "out of range");
  return static_cast<Nanos>(std::llround(ms * static_cast<double>(kMillisecond)));
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) type_error(path, "true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) type_error(path, "a string");
  return v.get<std::string>();
}

std::vector<std::string> texts(const json& v, const std::string& path) {
  if (!v.is_array()) type_error(path, "an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(text(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::uint64_t unsigned_int(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    type_error(path, "a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

pki::GeoPoint geo_point(const json& v, const std::string& path) {
  if (!v.is_object()) type_error(path, "an object with latitude and longitude");
  pki::GeoPoint p;
  for (const auto& [key, value] : v.items()) {
    if (key == "latitude") {
      p.latitude = number(value, path + ".latitude");
    } else if (key == "longitude") {
      p.longitude = number(value, path + ".longitude");
    } else {
      throw ConfigError(path + "." + key, "unknown field");
    }
  }
  if (!v.contains("latitude") || !v.contains("longitude")) {
    throw ConfigError(path, "latitude and longitude are required");
  }
  return p;
}

wire::PaymentOption payment_option(const json& v, const std::string& path) {
  const auto s = text(v, path);
  if (s == "ContractCertificate") return wire::PaymentOption::ContractCertificate;
  if (s == "ExternalPayment") return wire::PaymentOption::ExternalPayment;
  throw ConfigError(path, "expected ContractCertificate or ExternalPayment");
}

Topology topology(const json& v, const std::string& path) {
  const auto s = text(v, path);
  for (auto t : {Topology::Benign, Topology::Relay, Topology::SdpSpoof, Topology::OobAuth, Topology::OobRelay}) {
    if (topology_name(t) == s) return t;
  }
  throw ConfigError(path, "unknown topology '" + s + "'");
}

channel::Mode channel_mode(const json& v, const std::string& path) {
  const auto s = text(v, path);
  for (auto m : {channel::Mode::ServerAuth, channel::Mode::MutualAuth, channel::Mode::Plain}) {
    if (channel::mode_name(m) == s) return m;
  }
  throw ConfigError(path, "expected ServerAuth, MutualAuth or Plain");
}

pnc::AuthorizationPolicy policy(const json& v) {
  if (v.is_string()) return parse_policy(v.get<std::string>());
  if (!v.is_object()) type_error("policy", "a policy string or object");
  pnc::AuthorizationPolicy p;
  for (const auto& [key, value] : v.items()) {
    const std::string path = "policy." + key;
    if (key == "binding") {
      const auto s = text(value, path);
      if (s == "none") {
        p.binding = pnc::Binding::None;
      } else if (s == "station-bound") {
        p.binding = pnc::Binding::StationIdBound;
      } else {
        throw ConfigError(path, "expected none or station-bound");
      }
    } else if (key == "timing_threshold_ms") {
      if (value.is_null()) {
        p.timing_threshold.reset();
      } else {
        p.timing_threshold = millis(value, path);
      }
    } else {
      throw ConfigError(path, "unknown field");
    }
  }
  return p;
}

}  // namespace

ScenarioConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("$", "expected an object");
  ScenarioConfig c;
  if (doc.contains("base")) c = builtin_scenario(text(doc["base"], "base"));

  const std::map<std::string, Nanos ScenarioConfig::*> durations{
      {"link_latency_ms", &ScenarioConfig::link_latency},
      {"relay_latency_ms", &ScenarioConfig::relay_latency},
      {"spoof_latency_ms", &ScenarioConfig::spoof_latency},
      {"local_latency_ms", &ScenarioConfig::local_latency},
      {"oob_latency_ms", &ScenarioConfig::oob_latency},
      {"response_timeout_ms", &ScenarioConfig::response_timeout},
      {"payment_details_timeout_ms", &ScenarioConfig::payment_details_timeout},
      {"sequence_timeout_ms", &ScenarioConfig::sequence_timeout},
      {"relay_timeout_ms", &ScenarioConfig::relay_timeout},
      {"sdp_window_ms", &ScenarioConfig::sdp_window},
      {"horizon_ms", &ScenarioConfig::horizon},
  };
  const std::map<std::string, std::vector<std::string> ScenarioConfig::*> lists{
      {"vehicle_trust_roots", &ScenarioConfig::vehicle_trust_roots},
      {"contract_trust_roots", &ScenarioConfig::contract_trust_roots},
      {"revoked", &ScenarioConfig::revoked},
      {"expired", &ScenarioConfig::expired},
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "base") continue;
    if (auto d = durations.find(key); d != durations.end()) {
      c.*(d->second) = millis(value, key);
    } else if (auto l = lists.find(key); l != lists.end()) {
      c.*(l->second) = texts(value, key);
    } else if (key == "name") {
      c.name = text(value, key);
    } else if (key == "description") {
      c.description = text(value, key);
    } else if (key == "topology") {
      c.topology = topology(value, key);
    } else if (key == "seed") {
      c.seed = unsigned_int(value, key);
    } else if (key == "fixture_seed") {
      c.fixture_seed = unsigned_int(value, key);
    } else if (key == "epoch") {
      if (!value.is_number_integer()) type_error(key, "an integer");
      c.epoch = value.get<std::int64_t>();
    } else if (key == "policy") {
      c.policy = policy(value);
    } else if (key == "channel_mode") {
      c.channel_mode = channel_mode(value, key);
    } else if (key == "geo_threshold_m") {
      if (value.is_null()) {
        c.geo_threshold_m.reset();
      } else {
        c.geo_threshold_m = number(value, key);
      }
    } else if (key == "sdp_hardening") {
      if (!value.is_object()) type_error(key, "an object");
      for (const auto& [flag, on] : value.items()) {
        const std::string path = key + "." + flag;
        if (flag == "multi_response_abort") {
          c.sdp_hardening.multi_response_abort = boolean(on, path);
        } else if (flag == "mac_ip_consistency") {
          c.sdp_hardening.mac_ip_consistency = boolean(on, path);
        } else {
          throw ConfigError(path, "unknown field");
        }
      }
    } else if (key == "fake_credential") {
      c.fake_credential = text(value, key);
    } else if (key == "target_offers") {
      if (!value.is_array()) type_error(key, "an array of payment options");
      c.target_offers.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        c.target_offers.push_back(payment_option(value[i], key + "[" + std::to_string(i) + "]"));
      }
    } else if (key == "target_position") {
      c.target_position = geo_point(value, key);
    } else if (key == "victim_position") {
      c.victim_position = geo_point(value, key);
    } else if (key == "compromised_offset_m") {
      c.compromised_offset_m = number(value, key);
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  validate(c);
  return c;
}

nlohmann::ordered_json config_to_json(const ScenarioConfig& c) {
  auto ms = [](Nanos ns) { return static_cast<double>(ns) / static_cast<double>(kMillisecond); };
  auto point = [](const pki::GeoPoint& p) {
    nlohmann::ordered_json j;
    j["latitude"] = p.latitude;
    j["longitude"] = p.longitude;
    return j;
  };
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["topology"] = topology_name(c.topology);
  j["seed"] = c.seed;
  j["fixture_seed"] = c.fixture_seed;
  j["epoch"] = c.epoch;
  nlohmann::ordered_json pol;
  pol["binding"] = c.policy.binding == pnc::Binding::StationIdBound ? "station-bound" : "none";
  pol["timing_threshold_ms"] = c.policy.timing_threshold ? nlohmann::ordered_json(ms(*c.policy.timing_threshold))
                                                          : nlohmann::ordered_json(nullptr);
  j["policy"] = pol;
  j["channel_mode"] = channel::mode_name(c.channel_mode);
  j["geo_threshold_m"] = c.geo_threshold_m ? nlohmann::ordered_json(*c.geo_threshold_m) : nlohmann::ordered_json(nullptr);
  j["sdp_hardening"] = {{"multi_response_abort", c.sdp_hardening.multi_response_abort},
                        {"mac_ip_consistency", c.sdp_hardening.mac_ip_consistency}};
  j["link_latency_ms"] = ms(c.link_latency);
  j["relay_latency_ms"] = ms(c.relay_latency);
  j["spoof_latency_ms"] = ms(c.spoof_latency);
  j["local_latency_ms"] = ms(c.local_latency);
  j["oob_latency_ms"] = ms(c.oob_latency);
  j["response_timeout_ms"] = ms(c.response_timeout);
  j["payment_details_timeout_ms"] = ms(c.payment_details_timeout);
  j["sequence_timeout_ms"] = ms(c.sequence_timeout);
  j["relay_timeout_ms"] = ms(c.relay_timeout);
  j["sdp_window_ms"] = ms(c.sdp_window);
  j["horizon_ms"] = ms(c.horizon);
  j["fake_credential"] = c.fake_credential;
  auto offers_json = nlohmann::ordered_json::array();
  for (auto o : c.target_offers) offers_json.push_back(wire::payment_option_name(o));
  j["target_offers"] = offers_json;
  j["vehicle_trust_roots"] = c.vehicle_trust_roots;
  j["contract_trust_roots"] = c.contract_trust_roots;
  j["revoked"] = c.revoked;
  j["expired"] = c.expired;
  j["target_position"] = point(c.target_position);
  j["victim_position"] = point(c.victim_position);
  j["compromised_offset_m"] = c.compromised_offset_m;
  return j;
}

// ---------------------------------------------------------------- outcome

const SessionReport* Outcome::session(std::string_view actor) const {
  for (const auto& s : sessions) {
    if (s.actor == actor) return &s;
  }
  return nullptr;
}

bool Outcome::has_flag(DetectorFlag flag) const { return contains(flags, flag_name(flag)); }

nlohmann::ordered_json Outcome::to_json() const {
  nlohmann::ordered_json j;
  auto list = nlohmann::ordered_json::array();
  for (const auto& s : sessions) {
    nlohmann::ordered_json e;
    e["actor"] = s.actor;
    e["role"] = s.role;
    e["phase"] = phase_name(s.phase);
    e["decision"] = s.decision ? nlohmann::ordered_json(wire::authorization_code_name(*s.decision))
                               : nlohmann::ordered_json(nullptr);
    e["authorized_by"] = s.authorized_by;
    e["stop_cause"] = s.stop_cause;
    e["peer_station_id"] = s.peer_station_id;
    e["selected_peer"] = s.selected_peer;
    e["challenge"] = s.challenge ? to_hex(*s.challenge) : std::string();
    auto times = nlohmann::ordered_json::array();
    for (const auto& [phase, t] : s.phase_times) times.push_back({{"phase", phase_name(phase)}, {"t", t}});
    e["phase_times"] = times;
    list.push_back(e);
  }
  j["sessions"] = list;
  j["flags"] = flags;
  j["energy_billed_to"] = energy_billed_to ? nlohmann::ordered_json(*energy_billed_to) : nlohmann::ordered_json(nullptr);
  auto starts = nlohmann::ordered_json::array();
  for (const auto& r : remote_starts) starts.push_back({{"t", r.t}, {"station_id", r.station_id}, {"contract_id", r.contract_id}});
  j["remote_starts"] = starts;
  j["duration_ns"] = duration;
  j["quiescent"] = quiescent;
  return j;
}

// ---------------------------------------------------------------- run

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate(config);
  const Fixtures fx = build_fixtures(config);

  simnet::Network net(config.seed, config.link_latency);
  Context ctx{net, config.epoch, {}};
  RelayChannel relay(net, config.relay_latency);
  OobBackend backend;
  backend.register_token(std::string(kVictimToken), std::string(kVictimContract));
  backend.register_token(std::string(kAttackerToken), std::string(kAttackerContract));

  std::optional<pki::RevocationList> crl;
  if (!config.revoked.empty()) {
    crl = pki::RevocationList{"CPO-Sub", {config.revoked.begin(), config.revoked.end()}, config.epoch};
  }
  auto roots = [&](const std::vector<std::string>& names) {
    std::vector<pki::Certificate> out;
    for (const auto& n : names) out.push_back(fx.roots.at(n));
    return out;
  };

  auto vehicle = [&](const char* vin, const pki::GeoPoint& where) {
    EvccSettings s;
    s.evcc_id = vin;
    s.channel.mode = config.channel_mode;
    s.channel.trust_roots = roots(config.vehicle_trust_roots);
    s.channel.client_credential = fx.vehicles.at(vin);
    if (config.geo_threshold_m) s.channel.geo_policy = channel::GeoPolicy{where, *config.geo_threshold_m};
    s.channel.crl = crl;
    s.channel.epoch = config.epoch;
    s.binding = config.policy.binding;
    s.response_timeout = config.response_timeout;
    s.payment_details_timeout = config.payment_details_timeout;
    s.sdp_window = config.sdp_window;
    s.oob_latency = config.oob_latency;
    s.hardening = config.sdp_hardening;
    return s;
  };
  auto station = [&](const std::string& id, std::vector<wire::PaymentOption> offered, std::uint16_t port) {
    EvseSettings s;
    s.channel.mode = config.channel_mode;
    s.channel.trust_roots = {fx.roots.at(std::string(kOemRoot))};
    s.channel.server_credential = fx.stations.at(id);
    s.channel.crl = crl;
    s.channel.epoch = config.epoch;
    s.offered = std::move(offered);
    s.verifier.trust_roots = roots(config.contract_trust_roots);
    s.verifier.crl = crl;
    s.verifier.policy = config.policy;
    s.port = port;
    s.sequence_timeout = config.sequence_timeout;
    return s;
  };

  std::vector<std::unique_ptr<Agent>> agents;
  const std::string target_id(kTargetStation);
  const bool oob = config.topology == Topology::OobAuth || config.topology == Topology::OobRelay;

  // Regular station on cable B; every topology has one.
  auto target_settings = station(target_id, config.target_offers, 50000);
  target_settings.awaits_backend = oob;
  auto target = std::make_unique<Evse>(ctx, "evse", kTargetMac, kCableB, target_settings);
  Evse* target_ptr = target.get();
  agents.push_back(std::move(target));

  if (oob) {
    backend.register_station(target_id, [&net, target_ptr, latency = config.oob_latency](const std::string& contract) {
      net.schedule(latency, [target_ptr, contract] { target_ptr->remote_start(contract); });
    });
    backend.register_station(std::string(kCompromisedStation));
    backend.register_station(std::string(kLocalStation));
  }

  switch (config.topology) {
    case Topology::Benign:
    case Topology::OobAuth: {
      auto s = vehicle(kAttackerVehicle, config.target_position);
      if (config.topology == Topology::OobAuth) {
        s.oob_token = std::string(kAttackerToken);
      } else {
        s.contract = fx.contracts.at(std::string(kAttackerContract));
      }
      agents.push_back(std::make_unique<Evcc>(ctx, "ev", kEvMac, kCableB, std::move(s), &backend));
      break;
    }
    case Topology::Relay:
    case Topology::SdpSpoof:
    case Topology::OobRelay: {
      auto victim_settings = vehicle(kVictimVehicle, config.victim_position);
      if (config.topology == Topology::OobRelay) {
        victim_settings.oob_token = std::string(kVictimToken);
      } else {
        victim_settings.contract = fx.contracts.at(std::string(kVictimContract));
      }
      agents.push_back(std::make_unique<Evcc>(ctx, "victim", kVictimMac, kCableA, std::move(victim_settings), &backend));

      auto fake_offers = config.topology == Topology::OobRelay
                             ? std::vector<wire::PaymentOption>{wire::PaymentOption::ExternalPayment}
                             : std::vector<wire::PaymentOption>{wire::PaymentOption::ContractCertificate,
                                                                wire::PaymentOption::ExternalPayment};
      auto fake_settings = station(config.fake_credential, fake_offers, 50002);
      fake_settings.awaits_backend = config.topology == Topology::OobRelay;
      fake_settings.performs_slac = config.topology != Topology::SdpSpoof;
      auto fake = std::make_unique<FakeEvse>(ctx, "fake_evse", kFakeMac, kCableA, fake_settings, relay,
                                             config.relay_timeout);
      const auto fake_node = fake->node();
      agents.push_back(std::move(fake));

      if (config.topology == Topology::SdpSpoof) {
        auto local = station(std::string(kLocalStation),
                             {wire::PaymentOption::ContractCertificate, wire::PaymentOption::ExternalPayment}, 50001);
        agents.push_back(std::make_unique<Evse>(ctx, "evse_local", kLocalMac, kCableA, local));
        net.override_ipv6(fake_node, simnet::eui64_ipv6(kLocalMac));
        net.set_link_latency(kVictimMac, kFakeMac, config.spoof_latency);
        net.set_link_latency(kFakeMac, kVictimMac, config.spoof_latency);
        net.set_link_latency(kVictimMac, kLocalMac, config.local_latency);
        net.set_link_latency(kLocalMac, kVictimMac, config.local_latency);
      }

      auto attacker = vehicle(kAttackerVehicle, config.target_position);
      agents.push_back(std::make_unique<RelayEvcc>(ctx, "attacker_ev", kEvMac, kCableB, std::move(attacker), relay,
                                                   config.relay_timeout));
      break;
    }
  }

  for (auto& a : agents) a->start();
  net.run_until(config.horizon);

  ScenarioResult result;
  Outcome& out = result.outcome;
  out.quiescent = net.pending() == 0;
  out.duration = net.now();
  out.keylog = ctx.keylog;
  out.remote_starts = backend.remote_starts();
  // Vehicles first, then stations, in a fixed order.
  for (const char* name : {"ev", "victim", "attacker_ev", "evse", "fake_evse", "evse_local"}) {
    for (const auto& a : agents) {
      if (a->name() == name) out.sessions.push_back(a->report());
    }
  }
  for (const auto& s : out.sessions) {
    if (s.role == "evse" && s.billed_to && !out.energy_billed_to) out.energy_billed_to = s.billed_to;
  }
  for (const auto& e : net.transcript().events()) {
    if (e.kind != simnet::EventKind::DetectorFlag) continue;
    const auto name = e.detail.at("flag").get<std::string>();
    if (!contains(out.flags, name)) out.flags.push_back(name);
  }
  result.transcript = net.transcript();
  return result;
}

// ---------------------------------------------------------------- wire view

std::vector<WireMessage> wire_messages(const simnet::Transcript& transcript) {
  std::vector<WireMessage> out;
  for (const auto& e : transcript.events()) {
    if (e.kind != simnet::EventKind::FrameSent) continue;
    try {
      auto frame = wire::parse_v2gtp(from_hex(e.detail.at("payload").get<std::string>()));
      if (frame.payload_type != wire::kPayloadV2gMessage) continue;
      out.push_back(WireMessage{e.t, e.detail.at("from").get<std::string>(), e.detail.at("to").get<std::string>(),
                                wire::decode_tlv(frame.payload)});
    } catch (const std::exception&) {
      continue;
    }
  }
  return out;
}

// ---------------------------------------------------------------- expectations

namespace {

pki::GeoPoint station_position(const ScenarioConfig& c, const std::string& id) {
  if (id == kTargetStation) return c.target_position;
  if (id == kCompromisedStation) return pki::offset_north(c.victim_position, c.compromised_offset_m);
  return c.victim_position;
}

std::string station_root(const std::string& id) {
  return id == kRogueStation ? std::string(kRogueRoot) : std::string(kV2gRoot);
}

/// Empty when the vehicle would accept the station.
std::string handshake_failure(const ScenarioConfig& c, const std::string& station, const char* vin,
                              const pki::GeoPoint& vehicle_at) {
  if (!contains(c.vehicle_trust_roots, station_root(station))) return "ChainInvalid: UnknownRoot";
  if (contains(c.revoked, station)) return "ChainInvalid: Revoked";
  if (contains(c.expired, station)) return "ChainInvalid: Expired";
  if (c.geo_threshold_m && pki::geo_distance(vehicle_at, station_position(c, station)) > *c.geo_threshold_m) {
    return "GeoMismatch";
  }
  if (c.channel_mode == channel::Mode::MutualAuth) {
    if (contains(c.revoked, vin)) return "ChainInvalid: Revoked";
    if (contains(c.expired, vin)) return "ChainInvalid: Expired";
  }
  return {};
}

bool contract_chain_ok(const ScenarioConfig& c, std::string_view contract) {
  return contains(c.contract_trust_roots, kMoRoot) && !contains(c.revoked, contract) &&
         !contains(c.expired, contract);
}

wire::AuthorizationCode contract_code(const ScenarioConfig& c, std::string_view contract, const std::string& signed_for,
                                      Nanos measured) {
  if (!contract_chain_ok(c, contract)) return wire::AuthorizationCode::ChainInvalid;
  if (c.policy.binding == pnc::Binding::StationIdBound && signed_for != kTargetStation) {
    return wire::AuthorizationCode::BindingMismatch;
  }
  if (c.policy.timing_threshold && measured > *c.policy.timing_threshold) return wire::AuthorizationCode::TimingExceeded;
  return wire::AuthorizationCode::Accepted;
}

}  // namespace

Expectation expect(const ScenarioConfig& c) {
  using Stage = Expectation::Stage;
  using wire::PaymentOption;
  Expectation e;
  const std::string target(kTargetStation);

  auto fail_handshake = [&](const std::string& why) {
    e.stage = Stage::HandshakeFailed;
    e.handshake_failure = why;
    if (why == "GeoMismatch") e.flag = DetectorFlag::GeoMismatch;
  };

  switch (c.topology) {
    case Topology::Benign:
    case Topology::OobAuth: {
      if (auto why = handshake_failure(c, target, kAttackerVehicle, c.target_position); !why.empty()) {
        fail_handshake(why);
        e.summary = "vehicle aborts the handshake with " + why;
        break;
      }
      const bool plain = c.channel_mode == channel::Mode::Plain;
      if (c.topology == Topology::OobAuth) {
        if (!offers(c.target_offers, PaymentOption::ExternalPayment)) {
          e.stage = Stage::PaymentUnavailable;
          e.summary = "no external payment offered, session stops";
          break;
        }
        e.authorized_by = "backend";
        e.billed_to = std::string(kAttackerContract);
        e.remote_start_at = target;
        e.summary = "Authorized by backend at " + target + ", billed to " + *e.billed_to;
        break;
      }
      if (offers(c.target_offers, PaymentOption::ContractCertificate) && !plain) {
        e.code = contract_code(c, kAttackerContract, target, 2 * c.link_latency);
        e.authorized_by = "contract";
        if (*e.code == wire::AuthorizationCode::Accepted) {
          e.billed_to = std::string(kAttackerContract);
          e.summary = "Authorized, billed to own contract " + *e.billed_to;
        } else {
          e.summary = "Rejected(" + std::string(wire::authorization_code_name(*e.code)) + ")";
        }
        if (*e.code == wire::AuthorizationCode::TimingExceeded) e.flag = DetectorFlag::TimingExceeded;
      } else if (offers(c.target_offers, PaymentOption::ExternalPayment)) {
        e.authorized_by = "external";
        e.summary = "Authorized by external payment, no contract messages";
      } else {
        e.stage = Stage::PaymentUnavailable;
        e.summary = "no usable payment option, session stops";
      }
      break;
    }

    case Topology::Relay:
    case Topology::SdpSpoof:
    case Topology::OobRelay: {
      Nanos victim_link = c.link_latency;
      std::string station = c.fake_credential;
      e.selected_peer = "fake_evse";
      if (c.topology == Topology::SdpSpoof) {
        if (c.sdp_hardening.mac_ip_consistency) {
          e.stage = Stage::SdpAborted;
          e.flag = DetectorFlag::MacIpMismatch;
        } else if (c.sdp_hardening.multi_response_abort) {
          e.stage = Stage::SdpAborted;
          e.flag = DetectorFlag::SdpMultiResponse;
        }
        if (e.stage == Stage::SdpAborted) {
          e.selected_peer.clear();
          e.summary = "victim aborts discovery with " + std::string(flag_name(*e.flag));
          break;
        }
        if (c.spoof_latency > c.local_latency) {
          // The legitimate station answers first; the victim charges normally.
          e.selected_peer = "evse_local";
          if (auto why = handshake_failure(c, std::string(kLocalStation), kVictimVehicle, c.victim_position);
              !why.empty()) {
            fail_handshake(why);
            e.summary = "victim selects evse_local and aborts the handshake with " + why;
            break;
          }
          const bool signs = c.channel_mode != channel::Mode::Plain;
          const bool slow = c.policy.timing_threshold && 2 * c.local_latency > *c.policy.timing_threshold;
          if (signs && contract_chain_ok(c, kVictimContract)) {
            if (slow) {
              e.flag = DetectorFlag::TimingExceeded;
            } else {
              e.billed_to = std::string(kVictimContract);
            }
          }
          e.summary = "victim selects evse_local and charges there; the relay never starts";
          break;
        }
        victim_link = c.spoof_latency;
      }

      if (auto why = handshake_failure(c, station, kVictimVehicle, c.victim_position); !why.empty()) {
        fail_handshake(why);
        e.summary = "victim aborts the handshake with the fake station: " + why;
        break;
      }

      if (c.topology == Topology::OobRelay) {
        e.remote_start_at = station;
        e.summary = "remote start lands at " + station + "; " + target + " never authorizes";
        break;
      }

      // Victim PaymentDetailsReq to PaymentDetailsRes, and equally the regular
      // station's PaymentDetailsRes to AuthorizationReq.
      e.relay_round_trip = 2 * c.relay_latency + 2 * victim_link + 2 * c.link_latency;
      if (!offers(c.target_offers, PaymentOption::ContractCertificate) || c.channel_mode == channel::Mode::Plain) {
        e.stage = Stage::PaymentUnavailable;
        e.summary = "regular station offers no contract payment; the relay vehicle gives up";
        break;
      }
      if (e.relay_round_trip >= c.payment_details_timeout) {
        e.stage = Stage::VictimTimeout;
        e.summary = "victim times out before signing (relay round trip " + ms_text(e.relay_round_trip) + ")";
        break;
      }
      e.code = contract_code(c, kVictimContract, station, e.relay_round_trip);
      if (*e.code == wire::AuthorizationCode::Accepted) {
        e.billed_to = std::string(kVictimContract);
        e.authorized_by = "contract";
        e.summary = "attacker Authorized, billed to victim contract " + *e.billed_to;
      } else {
        e.summary = "attacker Rejected(" + std::string(wire::authorization_code_name(*e.code)) + ")";
      }
      if (*e.code == wire::AuthorizationCode::TimingExceeded) e.flag = DetectorFlag::TimingExceeded;
      break;
    }
  }
  return e;
}

namespace {

class Checker {
 public:
  void check(std::string name, bool passed, std::string detail = {}) {
    results_.push_back(CheckResult{std::move(name), passed, std::move(detail)});
  }
  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
};

std::string phase_of(const SessionReport* s) { return s ? std::string(phase_name(s->phase)) : "absent"; }

std::string code_text(const std::optional<wire::AuthorizationCode>& code) {
  return code ? std::string(wire::authorization_code_name(*code)) : "none";
}

bool has_message(const std::vector<WireMessage>& msgs, std::size_t index) {
  return std::any_of(msgs.begin(), msgs.end(), [&](const WireMessage& m) { return m.message.index() == index; });
}

template <typename T>
std::size_t index_of() {
  return wire::V2gMessage(T{}).index();
}

}  // namespace

std::vector<CheckResult> check_expectation(const ScenarioConfig& c, const Expectation& e, const ScenarioResult& r) {
  using Stage = Expectation::Stage;
  Checker k;
  const Outcome& o = r.outcome;
  const auto msgs = wire_messages(r.transcript);
  const auto billed = o.energy_billed_to.value_or("none");
  const auto* evse = o.session("evse");

  k.check("run reached quiescence before the horizon", o.quiescent);
  k.check("energy billed to " + e.billed_to.value_or("none"), o.energy_billed_to == e.billed_to, "got " + billed);
  if (e.flag) {
    k.check("detector flag " + std::string(flag_name(*e.flag)) + " raised", o.has_flag(*e.flag));
  } else {
    k.check("no detector flag raised", o.flags.empty());
  }

  const bool benign = c.topology == Topology::Benign || c.topology == Topology::OobAuth;
  const auto* vehicle = o.session(benign ? "ev" : "victim");

  if (e.stage == Stage::HandshakeFailed) {
    k.check("vehicle stopped with " + e.handshake_failure,
            vehicle && vehicle->phase == Phase::Stopped && vehicle->stop_cause == e.handshake_failure,
            vehicle ? phase_of(vehicle) + " / " + vehicle->stop_cause : "absent");
  }
  if (e.stage == Stage::SdpAborted) {
    const std::string cause(flag_name(*e.flag));
    k.check("victim stopped with " + cause,
            vehicle && vehicle->phase == Phase::Stopped && vehicle->stop_cause == cause,
            vehicle ? phase_of(vehicle) + " / " + vehicle->stop_cause : "absent");
    k.check("victim selected no peer", vehicle && vehicle->selected_peer.empty());
  }

  if (benign) {
    if (e.stage == Stage::Completed) {
      const bool contract = e.authorized_by == "contract";
      const Phase want = !contract || *e.code == wire::AuthorizationCode::Accepted ? Phase::Authorized : Phase::Rejected;
      k.check("vehicle ends " + std::string(phase_name(want)), vehicle && vehicle->phase == want, phase_of(vehicle));
      k.check("station ends " + std::string(phase_name(want)), evse && evse->phase == want, phase_of(evse));
      if (contract) {
        k.check("station decision " + code_text(e.code), evse && evse->decision == e.code,
                evse ? code_text(evse->decision) : "absent");
      } else {
        k.check("authorized by " + e.authorized_by, vehicle && vehicle->authorized_by == e.authorized_by &&
                                                        evse && evse->authorized_by == e.authorized_by);
        k.check("no PaymentDetails or Authorization messages on the wire",
                !has_message(msgs, index_of<wire::PaymentDetailsReq>()) &&
                    !has_message(msgs, index_of<wire::PaymentDetailsRes>()) &&
                    !has_message(msgs, index_of<wire::AuthorizationReq>()) &&
                    !has_message(msgs, index_of<wire::AuthorizationRes>()));
      }
    } else {
      k.check("station never authorizes", !evse || evse->phase != Phase::Authorized, phase_of(evse));
    }
    if (e.remote_start_at) {
      k.check("single remote start at " + *e.remote_start_at,
              o.remote_starts.size() == 1 && o.remote_starts[0].station_id == *e.remote_start_at);
    }
    return k.take();
  }

  const auto* attacker = o.session("attacker_ev");

  if (relay_topology(c.topology)) {
    if (e.selected_peer != "evse_local") {
      k.check("victim never Authorized", vehicle && vehicle->phase != Phase::Authorized, phase_of(vehicle));
    }
    if (e.stage != Stage::SdpAborted) {
      k.check("victim selected " + e.selected_peer, vehicle && vehicle->selected_peer == e.selected_peer,
              vehicle ? vehicle->selected_peer : "absent");
    }
  }

  if (c.topology == Topology::OobRelay) {
    k.check("regular station never Authorized", evse && evse->phase != Phase::Authorized, phase_of(evse));
    k.check("attacker vehicle never Authorized", attacker && attacker->phase != Phase::Authorized, phase_of(attacker));
    k.check("no remote start at the regular station",
            std::none_of(o.remote_starts.begin(), o.remote_starts.end(),
                         [](const RemoteStartRecord& s) { return s.station_id == kTargetStation; }));
    if (e.remote_start_at) {
      k.check("remote start at " + *e.remote_start_at + " for the victim contract",
              std::any_of(o.remote_starts.begin(), o.remote_starts.end(), [&](const RemoteStartRecord& s) {
                return s.station_id == *e.remote_start_at && s.contract_id == kVictimContract;
              }));
    } else {
      k.check("no remote start", o.remote_starts.empty());
    }
    return k.take();
  }

  if (e.stage != Stage::Completed || e.selected_peer != "fake_evse") {
    k.check("attacker vehicle never Authorized", !attacker || attacker->phase != Phase::Authorized,
            phase_of(attacker));
    k.check("regular station never Authorized", evse && evse->phase != Phase::Authorized, phase_of(evse));
    if (e.stage == Stage::VictimTimeout) {
      k.check("victim stopped on a timeout",
              vehicle && vehicle->phase == Phase::Stopped && vehicle->stop_cause.rfind("Timeout", 0) == 0,
              vehicle ? vehicle->stop_cause : "absent");
    }
    return k.take();
  }

  // The relay ran to the regular station's decision.
  const bool accepted = *e.code == wire::AuthorizationCode::Accepted;
  const Phase want = accepted ? Phase::Authorized : Phase::Rejected;
  k.check("attacker vehicle ends " + std::string(phase_name(want)), attacker && attacker->phase == want,
          phase_of(attacker));
  k.check("regular station decision " + code_text(e.code), evse && evse->decision == e.code,
          evse ? code_text(evse->decision) : "absent");
  k.check("victim session Stopped", vehicle && vehicle->phase == Phase::Stopped, phase_of(vehicle));

  // Challenge equality, from the wire rather than actor state.
  std::optional<wire::ChallengeBytes> issued;
  std::optional<wire::ChallengeBytes> forwarded;
  for (const auto& m : msgs) {
    if (const auto* res = std::get_if<wire::PaymentDetailsRes>(&m.message)) {
      if (m.from == "evse" && m.to == "attacker_ev") issued = res->challenge;
      if (m.from == "fake_evse" && m.to == "victim") forwarded = res->challenge;
    }
  }
  k.check("victim-side challenge equals the regular station's challenge", issued && forwarded && *issued == *forwarded,
          std::string("issued ") + (issued ? to_hex(*issued) : "none") + ", forwarded " +
              (forwarded ? to_hex(*forwarded) : "none"));

  // The fake station falls silent once it holds the signature.
  Nanos captured = -1;
  for (const auto& ev : r.transcript.events()) {
    if (ev.kind == simnet::EventKind::Decision && ev.actor == "fake_evse" &&
        ev.detail.value("action", "") == "signature_captured") {
      captured = ev.t;
    }
  }
  const auto& events = r.transcript.events();
  const bool silent = captured >= 0 && std::none_of(events.begin(), events.end(), [&](const simnet::TranscriptEvent& ev) {
                        return ev.kind == simnet::EventKind::FrameSent && ev.t >= captured &&
                               ev.detail.value("from", "") == "fake_evse" && ev.detail.value("to", "") == "victim";
                      });
  k.check("no frames from the fake station to the victim after signature capture", silent);
  return k.take();
}

}  // namespace pncsim::actors
