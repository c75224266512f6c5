// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/channel/handshake.hpp"

#include <sstream>

#include "pncsim/wire/tlv.hpp"

namespace pncsim::channel {

namespace {

using wire::CodecError;

constexpr std::uint8_t kClientHello = 0x21;
constexpr std::uint8_t kServerHello = 0x22;
constexpr std::uint8_t kClientCertificate = 0x23;
constexpr std::uint8_t kFinished = 0x24;
constexpr std::uint8_t kAlert = 0x25;

Mode to_mode(std::uint8_t raw) {
  if (raw > static_cast<std::uint8_t>(Mode::Plain)) {
    throw CodecError(CodecError::Code::Malformed, "unknown channel mode");
  }
  return static_cast<Mode>(raw);
}

std::int64_t wall_seconds(const ChannelConfig& cfg, Nanos now) { return cfg.epoch + now / kSecond; }

std::vector<Bytes> encode_chain(const std::vector<pki::Certificate>& chain) {
  std::vector<Bytes> out;
  out.reserve(chain.size());
  for (const auto& c : chain) out.push_back(pki::encode_certificate(c));
  return out;
}

std::vector<pki::Certificate> decode_chain(const std::vector<Bytes>& items) {
  std::vector<pki::Certificate> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(pki::decode_certificate(item));
  return out;
}

std::array<std::uint8_t, 32> finished_mac(const Channel& ch, Side side) {
  Bytes input = to_bytes("finished");
  input.push_back(static_cast<std::uint8_t>(side));
  input.insert(input.end(), ch.master_secret.begin(), ch.master_secret.end());
  input.insert(input.end(), ch.session_id.begin(), ch.session_id.end());
  return pki::sha256(input);
}

Bytes finished_record(const Channel& ch, Side side) {
  wire::TlvWriter w(kFinished);
  w.u8(0x01, static_cast<std::uint8_t>(side));
  w.field(0x02, finished_mac(ch, side));
  return std::move(w).finish();
}

Bytes alert_record(const HandshakeFailure& f) {
  wire::TlvWriter w(kAlert);
  w.u8(0x01, static_cast<std::uint8_t>(f.code));
  w.u8(0x02, static_cast<std::uint8_t>(f.cause));
  w.text(0x03, f.subject);
  return std::move(w).finish();
}

HandshakeFailure decode_alert(wire::TlvReader& r, Side sender) {
  HandshakeFailure f;
  auto code = r.u8(0x01);
  auto cause = r.u8(0x02);
  if (code > static_cast<std::uint8_t>(HandshakeFailure::Code::Protocol) ||
      cause > static_cast<std::uint8_t>(pki::ChainError::RoleMismatch)) {
    throw CodecError(CodecError::Code::Malformed, "unknown alert code");
  }
  f.code = static_cast<HandshakeFailure::Code>(code);
  f.cause = static_cast<pki::ChainError>(cause);
  f.subject = r.text(0x03);
  r.finish();
  f.side = sender;
  f.detail = "alert from peer";
  return f;
}

HandshakeFailure protocol_failure(Side side, std::string detail) {
  HandshakeFailure f;
  f.code = HandshakeFailure::Code::Protocol;
  f.side = side;
  f.detail = std::move(detail);
  return f;
}

HandshakeFailure chain_failure(Side side, const pki::ChainResult& r) {
  HandshakeFailure f;
  f.code = HandshakeFailure::Code::ChainInvalid;
  f.side = side;
  f.cause = r.error;
  f.subject = r.subject;
  return f;
}

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::ServerAuth:
      return "ServerAuth";
    case Mode::MutualAuth:
      return "MutualAuth";
    case Mode::Plain:
      return "Plain";
  }
  return "Unknown";
}

std::string_view side_name(Side side) { return side == Side::Client ? "client" : "server"; }

std::string_view failure_code_name(HandshakeFailure::Code code) {
  switch (code) {
    case HandshakeFailure::Code::ChainInvalid:
      return "ChainInvalid";
    case HandshakeFailure::Code::GeoMismatch:
      return "GeoMismatch";
    case HandshakeFailure::Code::ModeMismatch:
      return "ModeMismatch";
    case HandshakeFailure::Code::MissingCredential:
      return "MissingCredential";
    case HandshakeFailure::Code::Protocol:
      return "Protocol";
  }
  return "Unknown";
}

std::string HandshakeFailure::describe() const {
  std::ostringstream out;
  out << failure_code_name(code);
  if (code == Code::ChainInvalid) out << "(" << side_name(side) << ", " << pki::chain_error_name(cause) << ")";
  if (!subject.empty()) out << " subject=" << subject;
  if (!detail.empty()) out << " " << detail;
  return out.str();
}

MasterSecret derive_master_secret(const Random& client_random, const Random& server_random) {
  Bytes input(client_random.begin(), client_random.end());
  input.insert(input.end(), server_random.begin(), server_random.end());
  return pki::sha256(input);
}

std::string export_keylog(const Channel& channel) {
  if (channel.mode == Mode::Plain) {
    throw KeylogError(KeylogError::Code::PlainChannel, "plain channels have no key material");
  }
  return "CLIENT_RANDOM " + to_hex(channel.client_random) + " " + to_hex(channel.master_secret);
}

// ---------------------------------------------------------------- client

ClientHandshake::ClientHandshake(ChannelConfig config) : config_(std::move(config)) {}

HandshakeStep ClientHandshake::fail(HandshakeFailure failure) {
  state_ = State::Failed;
  HandshakeStep step;
  step.outgoing.push_back(alert_record(failure));
  step.failure = std::move(failure);
  return step;
}

Bytes ClientHandshake::start(DeterministicRng& rng) {
  pending_ = Channel{};
  pending_.mode = config_.mode;
  pending_.client_random = rng.bytes<32>();
  state_ = State::AwaitServerHello;
  wire::TlvWriter w(kClientHello);
  w.field(0x01, pending_.client_random);
  w.u8(0x02, static_cast<std::uint8_t>(config_.mode));
  return std::move(w).finish();
}

HandshakeStep ClientHandshake::on_record(ByteView record, Nanos now) {
  if (done()) return {};
  try {
    wire::TlvReader r(record);
    const auto tag = r.message_tag();
    if (tag == kAlert) {
      state_ = State::Failed;
      return HandshakeStep{{}, std::nullopt, decode_alert(r, Side::Server)};
    }

    if (state_ == State::AwaitServerHello && tag == kServerHello) {
      pending_.server_random = r.fixed<32>(0x01);
      pending_.session_id = r.fixed<8>(0x02);
      Mode mode = to_mode(r.u8(0x03));
      Bytes cert_bytes = r.field(0x04);
      auto chain_items = r.list(0x05);
      r.finish();

      if (mode != config_.mode) {
        HandshakeFailure f;
        f.code = HandshakeFailure::Code::ModeMismatch;
        f.side = Side::Client;
        f.detail = std::string("offered ") + std::string(mode_name(mode)) + ", expected " +
                   std::string(mode_name(config_.mode));
        return fail(std::move(f));
      }

      HandshakeStep step;
      if (mode != Mode::Plain) {
        auto cert = pki::decode_certificate(cert_bytes);
        auto chain = decode_chain(chain_items);
        auto result = pki::verify_chain(cert, chain, config_.trust_roots, wall_seconds(config_, now), config_.crl);
        if (!result.ok()) return fail(chain_failure(Side::Client, result));
        if (cert.role != pki::Role::StationLeaf) {
          return fail(chain_failure(Side::Client, {pki::ChainError::RoleMismatch, cert.subject_id}));
        }
        if (config_.geo_policy) {
          auto check = pki::check_geo_binding(cert, config_.geo_policy->vehicle_position,
                                              config_.geo_policy->threshold_m);
          if (check != pki::GeoCheck::Ok) {
            HandshakeFailure f;
            f.code = HandshakeFailure::Code::GeoMismatch;
            f.side = Side::Client;
            f.subject = cert.subject_id;
            if (check == pki::GeoCheck::NoGeoExtension) {
              f.detail = "certificate carries no coordinates";
            } else {
              std::ostringstream d;
              d << "distance_m=" << static_cast<std::int64_t>(
                                        pki::geo_distance(*cert.geo, config_.geo_policy->vehicle_position))
                << " threshold_m=" << static_cast<std::int64_t>(config_.geo_policy->threshold_m);
              f.detail = d.str();
            }
            return fail(std::move(f));
          }
        }
        pending_.peer_station_id = cert.subject_id;
        pending_.master_secret = derive_master_secret(pending_.client_random, pending_.server_random);

        if (mode == Mode::MutualAuth) {
          if (!config_.client_credential) {
            HandshakeFailure f;
            f.code = HandshakeFailure::Code::MissingCredential;
            f.side = Side::Client;
            f.detail = "mutual authentication without a vehicle credential";
            return fail(std::move(f));
          }
          wire::TlvWriter w(kClientCertificate);
          w.field(0x01, pki::encode_certificate(config_.client_credential->certificate));
          w.list(0x02, encode_chain(config_.client_credential->chain));
          step.outgoing.push_back(std::move(w).finish());
        }
      }
      step.outgoing.push_back(finished_record(pending_, Side::Client));
      state_ = State::AwaitFinished;
      return step;
    }

    if (state_ == State::AwaitFinished && tag == kFinished) {
      auto side = r.u8(0x01);
      auto mac = r.fixed<32>(0x02);
      r.finish();
      if (side != static_cast<std::uint8_t>(Side::Server) || mac != finished_mac(pending_, Side::Server)) {
        return fail(protocol_failure(Side::Client, "server Finished does not verify"));
      }
      state_ = State::Done;
      pending_.established_at = now;
      return HandshakeStep{{}, pending_, std::nullopt};
    }
    return fail(protocol_failure(Side::Client, "unexpected handshake record " + std::to_string(tag)));
  } catch (const CodecError& e) {
    return fail(protocol_failure(Side::Client, std::string("malformed record: ") + e.what()));
  }
}

// ---------------------------------------------------------------- server

ServerHandshake::ServerHandshake(ChannelConfig config) : config_(std::move(config)) {}

HandshakeStep ServerHandshake::fail(HandshakeFailure failure) {
  state_ = State::Failed;
  HandshakeStep step;
  step.outgoing.push_back(alert_record(failure));
  step.failure = std::move(failure);
  return step;
}

HandshakeStep ServerHandshake::on_record(ByteView record, Nanos now, DeterministicRng& rng) {
  if (done()) return {};
  try {
    wire::TlvReader r(record);
    const auto tag = r.message_tag();
    if (tag == kAlert) {
      state_ = State::Failed;
      return HandshakeStep{{}, std::nullopt, decode_alert(r, Side::Client)};
    }

    if (state_ == State::AwaitClientHello && tag == kClientHello) {
      pending_ = Channel{};
      pending_.client_random = r.fixed<32>(0x01);
      Mode mode = to_mode(r.u8(0x02));
      r.finish();
      if (mode != config_.mode) {
        HandshakeFailure f;
        f.code = HandshakeFailure::Code::ModeMismatch;
        f.side = Side::Server;
        f.detail = std::string("requested ") + std::string(mode_name(mode)) + ", configured " +
                   std::string(mode_name(config_.mode));
        return fail(std::move(f));
      }
      if (mode != Mode::Plain && !config_.server_credential) {
        HandshakeFailure f;
        f.code = HandshakeFailure::Code::MissingCredential;
        f.side = Side::Server;
        f.detail = "station has no credential";
        return fail(std::move(f));
      }
      pending_.mode = mode;
      pending_.server_random = rng.bytes<32>();
      pending_.session_id = rng.bytes<8>();
      if (mode != Mode::Plain) {
        pending_.master_secret = derive_master_secret(pending_.client_random, pending_.server_random);
      }

      wire::TlvWriter w(kServerHello);
      w.field(0x01, pending_.server_random);
      w.field(0x02, pending_.session_id);
      w.u8(0x03, static_cast<std::uint8_t>(mode));
      if (mode == Mode::Plain) {
        w.field(0x04, Bytes{});
        w.list(0x05, {});
      } else {
        w.field(0x04, pki::encode_certificate(config_.server_credential->certificate));
        w.list(0x05, encode_chain(config_.server_credential->chain));
      }
      state_ = mode == Mode::MutualAuth ? State::AwaitClientCertificate : State::AwaitFinished;
      return HandshakeStep{{std::move(w).finish()}, std::nullopt, std::nullopt};
    }

    if (state_ == State::AwaitClientCertificate && tag == kClientCertificate) {
      auto cert = pki::decode_certificate(r.field(0x01));
      auto chain = decode_chain(r.list(0x02));
      r.finish();
      auto result = pki::verify_chain(cert, chain, config_.trust_roots, wall_seconds(config_, now), config_.crl);
      if (!result.ok()) return fail(chain_failure(Side::Server, result));
      if (cert.role != pki::Role::VehicleLeaf) {
        return fail(chain_failure(Side::Server, {pki::ChainError::RoleMismatch, cert.subject_id}));
      }
      pending_.peer_client_id = cert.subject_id;
      state_ = State::AwaitFinished;
      return {};
    }

    if (state_ == State::AwaitFinished && tag == kFinished) {
      auto side = r.u8(0x01);
      auto mac = r.fixed<32>(0x02);
      r.finish();
      if (side != static_cast<std::uint8_t>(Side::Client) || mac != finished_mac(pending_, Side::Client)) {
        return fail(protocol_failure(Side::Server, "client Finished does not verify"));
      }
      if (pending_.mode != Mode::Plain) {
        pending_.peer_station_id = config_.server_credential->certificate.subject_id;
      }
      state_ = State::Done;
      pending_.established_at = now;
      return HandshakeStep{{finished_record(pending_, Side::Server)}, pending_, std::nullopt};
    }
    return fail(protocol_failure(Side::Server, "unexpected handshake record " + std::to_string(tag)));
  } catch (const CodecError& e) {
    return fail(protocol_failure(Side::Server, std::string("malformed record: ") + e.what()));
  }
}

// ---------------------------------------------------------------- driver

HandshakeResult handshake(simnet::Network& network, simnet::NodeId client, simnet::NodeId server,
                          const ChannelConfig& client_config, const ChannelConfig& server_config,
                          std::uint16_t port) {
  ClientHandshake c(client_config);
  ServerHandshake s(server_config);
  HandshakeResult result;
  const Mac client_mac = network.node(client).mac;
  const Mac server_mac = network.node(server).mac;

  auto send_all = [&](simnet::NodeId from, const Mac& to, std::vector<Bytes>& records) {
    for (auto& rec : records) {
      network.send(from, to, simnet::Transport::Stream, port, wire::frame_v2gtp(wire::kPayloadHandshake, rec));
    }
  };
  auto note_failure = [&](std::optional<HandshakeFailure>& f) {
    if (f && !result.failure) result.failure = std::move(f);
  };
  auto unwrap = [](const simnet::Frame& frame) -> std::optional<Bytes> {
    try {
      auto parsed = wire::parse_v2gtp(frame.payload);
      if (parsed.payload_type != wire::kPayloadHandshake) return std::nullopt;
      return parsed.payload;
    } catch (const CodecError&) {
      return std::nullopt;
    }
  };

  network.set_handler(client, [&](const simnet::Frame& frame) {
    auto rec = unwrap(frame);
    if (!rec) return;
    auto step = c.on_record(*rec, network.now());
    send_all(client, server_mac, step.outgoing);
    if (step.established) result.client = std::move(step.established);
    note_failure(step.failure);
  });
  network.set_handler(server, [&](const simnet::Frame& frame) {
    auto rec = unwrap(frame);
    if (!rec) return;
    auto step = s.on_record(*rec, network.now(), network.rng());
    send_all(server, client_mac, step.outgoing);
    if (step.established) result.server = std::move(step.established);
    note_failure(step.failure);
  });

  std::vector<Bytes> hello{c.start(network.rng())};
  send_all(client, server_mac, hello);
  while (!(c.done() && s.done()) && network.step()) {
  }
  network.set_handler(client, nullptr);
  network.set_handler(server, nullptr);
  return result;
}

}  // namespace pncsim::channel
