// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pncsim/bytes.hpp"
#include "pncsim/pki/authority.hpp"
#include "pncsim/simnet/network.hpp"
#include "pncsim/wire/v2gtp.hpp"

namespace pncsim::channel {

/// Authentication mode, chosen through the SDP security byte.
enum class Mode : std::uint8_t { ServerAuth = 0, MutualAuth = 1, Plain = 2 };

std::string_view mode_name(Mode mode);

struct GeoPolicy {
  pki::GeoPoint vehicle_position;
  double threshold_m = 500.0;
};

struct ChannelConfig {
  Mode mode = Mode::ServerAuth;
  std::vector<pki::Certificate> trust_roots;
  std::optional<pki::Credential> client_credential;
  std::optional<pki::Credential> server_credential;
  std::optional<GeoPolicy> geo_policy;  // client side only
  std::optional<pki::RevocationList> crl;
  /// Wall-clock seconds at virtual time zero; certificate windows are
  /// checked against epoch + virtual_now.
  std::int64_t epoch = 0;
};

using Random = std::array<std::uint8_t, 32>;
using SessionId = std::array<std::uint8_t, 8>;
using MasterSecret = std::array<std::uint8_t, 32>;

struct Channel {
  Mode mode = Mode::Plain;
  SessionId session_id{};
  std::string peer_station_id;  // server leaf subject, empty in Plain mode
  std::string peer_client_id;   // MutualAuth, server side
  Nanos established_at = 0;
  MasterSecret master_secret{};
  Random client_random{};
  Random server_random{};

  friend bool operator==(const Channel&, const Channel&) = default;
};

enum class Side : std::uint8_t { Client = 0, Server = 1 };

std::string_view side_name(Side side);

struct HandshakeFailure {
  enum class Code : std::uint8_t {
    ChainInvalid = 0,
    GeoMismatch = 1,
    ModeMismatch = 2,
    MissingCredential = 3,
    Protocol = 4,
  };
  Code code = Code::Protocol;
  Side side = Side::Client;  // the endpoint that detected the failure
  pki::ChainError cause = pki::ChainError::Ok;
  std::string subject;
  std::string detail;

  std::string describe() const;
  friend bool operator==(const HandshakeFailure&, const HandshakeFailure&) = default;
};

std::string_view failure_code_name(HandshakeFailure::Code code);

/// Result of feeding one record into a handshake state machine.
struct HandshakeStep {
  std::vector<Bytes> outgoing;  // handshake records, unframed
  std::optional<Channel> established;
  std::optional<HandshakeFailure> failure;
};

/// Client side: ClientHello, then ServerHello validation, optional
/// ClientCertificate, Finished; established on the server's Finished.
class ClientHandshake {
 public:
  explicit ClientHandshake(ChannelConfig config);

  Bytes start(DeterministicRng& rng);
  HandshakeStep on_record(ByteView record, Nanos now);

  bool done() const { return state_ == State::Done || state_ == State::Failed; }

 private:
  enum class State { Initial, AwaitServerHello, AwaitFinished, Done, Failed };
  HandshakeStep fail(HandshakeFailure failure);

  ChannelConfig config_;
  State state_ = State::Initial;
  Channel pending_;
};

/// Server side: answers ClientHello with ServerHello, validates the client
/// chain in MutualAuth mode and confirms with Finished.
class ServerHandshake {
 public:
  explicit ServerHandshake(ChannelConfig config);

  HandshakeStep on_record(ByteView record, Nanos now, DeterministicRng& rng);

  bool done() const { return state_ == State::Done || state_ == State::Failed; }

 private:
  enum class State { AwaitClientHello, AwaitClientCertificate, AwaitFinished, Done, Failed };
  HandshakeStep fail(HandshakeFailure failure);

  ChannelConfig config_;
  State state_ = State::AwaitClientHello;
  Channel pending_;
};

MasterSecret derive_master_secret(const Random& client_random, const Random& server_random);

class KeylogError : public std::runtime_error {
 public:
  enum class Code { PlainChannel };
  KeylogError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// "CLIENT_RANDOM <client_random> <master_secret>", uppercase hex, no
/// trailing newline.
std::string export_keylog(const Channel& channel);

struct HandshakeResult {
  std::optional<Channel> client;
  std::optional<Channel> server;
  std::optional<HandshakeFailure> failure;
  bool ok() const { return client.has_value() && server.has_value(); }
};

/// Runs a complete handshake between two attached nodes as V2GTP frames on
/// the simulated stream, stepping the network until both sides finish.
/// Replaces the frame handlers of both nodes.
HandshakeResult handshake(simnet::Network& network, simnet::NodeId client, simnet::NodeId server,
                          const ChannelConfig& client_config, const ChannelConfig& server_config,
                          std::uint16_t port = wire::kDynamicPortMin);

}  // namespace pncsim::channel
