// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>

#include "pncsim/actors/scenario.hpp"

namespace pncsim::cli {
namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string keylog;
  std::string outcome;
  std::optional<std::string> policy;
  std::optional<double> relay_latency_ms;
  std::optional<double> geo_threshold_m;
  std::string config;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << content;
  if (!f.flush()) throw IoError("cannot write '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw actors::ConfigError("$", std::string("invalid JSON in '") + path + "': " + e.what());
  }
}

actors::ScenarioConfig resolve(const RunOptions& o) {
  actors::ScenarioConfig c;
  if (!o.config.empty()) {
    auto doc = read_json(o.config);
    if (!o.name.empty()) {
      if (!doc.is_object()) throw actors::ConfigError("$", "config must be an object");
      if (doc.contains("base") && doc["base"] != o.name) {
        throw actors::ConfigError("base", "config base '" + doc["base"].dump() + "' conflicts with '" + o.name + "'");
      }
      doc["base"] = o.name;
    }
    c = actors::config_from_json(doc);
  } else if (!o.name.empty()) {
    c = actors::builtin_scenario(o.name);
  } else {
    throw actors::ConfigError("name", "a scenario name or --config is required");
  }

  if (o.seed) c.seed = *o.seed;
  if (o.policy) c.policy = actors::parse_policy(*o.policy);
  if (o.relay_latency_ms) {
    if (!(*o.relay_latency_ms >= 0)) throw actors::ConfigError("--relay-latency", "must be >= 0");
    c.relay_latency = static_cast<Nanos>(*o.relay_latency_ms * static_cast<double>(kMillisecond));
  }
  if (o.geo_threshold_m) {
    if (!(*o.geo_threshold_m > 0)) throw actors::ConfigError("--geo-threshold", "must be > 0");
    c.geo_threshold_m = *o.geo_threshold_m;
  }
  actors::validate(c);
  return c;
}

int list(std::ostream& out) {
  std::size_t width = 0;
  for (const auto& b : actors::builtin_scenarios()) width = std::max(width, b.name.size());
  for (const auto& b : actors::builtin_scenarios()) {
    out << b.name << std::string(width - b.name.size() + 2, ' ') << b.description << '\n';
  }
  return kExitMet;
}

int run_one(const RunOptions& o, std::ostream& out) {
  const auto config = resolve(o);
  const auto expectation = actors::expect(config);
  const auto result = actors::run_scenario(config);
  const auto checks = actors::check_expectation(config, expectation, result);

  if (!o.out.empty()) write_file(o.out, result.transcript.to_jsonl());
  if (!o.keylog.empty()) {
    std::string text;
    for (const auto& line : result.outcome.keylog) text += line + '\n';
    write_file(o.keylog, text);
  }
  if (!o.outcome.empty()) {
    auto doc = result.outcome.to_json();
    doc["scenario"] = config.name;
    doc["seed"] = config.seed;
    doc["expectation"] = expectation.summary;
    doc["expectation_met"] = actors::all_passed(checks);
    write_file(o.outcome, doc.dump(2) + '\n');
  }

  out << "scenario " << config.name << " seed " << config.seed << '\n';
  out << "expected: " << expectation.summary << '\n';
  for (const auto& s : result.outcome.sessions) {
    out << "  " << s.actor << ": " << actors::phase_name(s.phase);
    if (s.decision) out << " (" << wire::authorization_code_name(*s.decision) << ')';
    if (!s.stop_cause.empty()) out << " cause=" << s.stop_cause;
    out << '\n';
  }
  for (const auto& f : result.outcome.flags) out << "  flag " << f << '\n';
  out << "  billed_to: " << result.outcome.energy_billed_to.value_or("-") << '\n';
  for (const auto& k : checks) {
    if (!k.passed) out << "  check " << k.name << " failed: " << k.detail << '\n';
  }
  const bool met = actors::all_passed(checks);
  out << (met ? "expectation met" : "expectation violated") << '\n';
  return met ? kExitMet : kExitViolated;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plug & Charge relay attack simulator", "pncsim"};
  app.require_subcommand(1);
  auto* list_cmd = app.add_subcommand("list", "List built-in scenarios");
  auto* run_cmd = app.add_subcommand("run", "Run a built-in or file-based scenario");

  RunOptions o;
  run_cmd->add_option("name", o.name, "Built-in scenario name (base when combined with --config)");
  run_cmd->add_option("--seed", o.seed, "Network RNG seed");
  run_cmd->add_option("--out", o.out, "Transcript output (JSON Lines)");
  run_cmd->add_option("--keylog", o.keylog, "Key log output");
  run_cmd->add_option("--outcome", o.outcome, "Outcome summary output (JSON)");
  run_cmd->add_option("--policy", o.policy, "none | station-bound | timing:<ms> | station-bound+timing:<ms>");
  run_cmd->add_option("--relay-latency", o.relay_latency_ms, "One-way relay latency in ms");
  run_cmd->add_option("--geo-threshold", o.geo_threshold_m, "Vehicle geo check threshold in metres");
  run_cmd->add_option("--config", o.config, "Declarative scenario file (JSON)");

  // CLI11 expects argv order reversed.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitMet;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (list_cmd->parsed()) return list(out);
    return run_one(o, out);
  } catch (const actors::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace pncsim::cli
