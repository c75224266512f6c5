// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <array>
#include <cstdint>

#include "pncsim/bytes.hpp"

namespace pncsim::wire {

inline constexpr std::uint8_t kV2gtpVersion = 0x01;
inline constexpr std::uint8_t kV2gtpInverseVersion = 0xFE;
inline constexpr std::size_t kV2gtpHeaderLength = 8;

// Payload types. 0x8001 and 0x9000/0x9001 follow the transport protocol; the
// handshake and SLAC-match values are local to this simulator.
inline constexpr std::uint16_t kPayloadV2gMessage = 0x8001;
inline constexpr std::uint16_t kPayloadHandshake = 0x8101;
inline constexpr std::uint16_t kPayloadSlacMatch = 0x88E1;
inline constexpr std::uint16_t kPayloadSdpRequest = 0x9000;
inline constexpr std::uint16_t kPayloadSdpResponse = 0x9001;

inline constexpr std::uint16_t kSdpServerPort = 15118;
inline constexpr std::uint16_t kDynamicPortMin = 49152;

struct V2gtpHeader {
  std::uint8_t version = kV2gtpVersion;
  std::uint8_t inverse_version = kV2gtpInverseVersion;
  std::uint16_t payload_type = 0;
  std::uint32_t payload_length = 0;
};

struct V2gtpFrame {
  std::uint16_t payload_type = 0;
  Bytes payload;
  friend bool operator==(const V2gtpFrame&, const V2gtpFrame&) = default;
};

Bytes frame_v2gtp(std::uint16_t payload_type, ByteView payload);

/// BadVersion when the first two bytes are not 01 FE, LengthMismatch when
/// the declared length disagrees with the bytes present, Malformed when the
/// input is shorter than a header.
V2gtpFrame parse_v2gtp(ByteView bytes);

enum class SdpSecurity : std::uint8_t { Tls = 0x00, None = 0x10 };
enum class SdpTransport : std::uint8_t { Stream = 0x00 };

struct SdpRequest {
  SdpSecurity security = SdpSecurity::Tls;
  SdpTransport transport = SdpTransport::Stream;
  friend bool operator==(const SdpRequest&, const SdpRequest&) = default;
};

struct SdpResponse {
  Ipv6 address{};
  std::uint16_t port = kDynamicPortMin;
  SdpSecurity security = SdpSecurity::Tls;
  SdpTransport transport = SdpTransport::Stream;
  friend bool operator==(const SdpResponse&, const SdpResponse&) = default;
};

// Fixed layouts: request [security, transport]; response [address(16),
// port(2, BE), security, transport].
Bytes encode_sdp(const SdpRequest& request);
Bytes encode_sdp(const SdpResponse& response);
SdpRequest decode_sdp_request(ByteView payload);
SdpResponse decode_sdp_response(ByteView payload);

/// Analog of the match confirmation that closes SLAC: the network membership
/// key and network identifier, sent in clear to everyone on the cable.
struct SlacMatch {
  std::array<std::uint8_t, 16> nmk{};
  std::array<std::uint8_t, 7> nid{};
  friend bool operator==(const SlacMatch&, const SlacMatch&) = default;
};

Bytes encode_slac_match(const SlacMatch& match);
SlacMatch decode_slac_match(ByteView payload);

}  // namespace pncsim::wire
