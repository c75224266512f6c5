// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/wire/v2gtp.hpp"

#include <algorithm>
#include <limits>

#include "pncsim/wire/tlv.hpp"

namespace pncsim::wire {

namespace {

SdpSecurity to_security(std::uint8_t raw) {
  if (raw == 0x00) return SdpSecurity::Tls;
  if (raw == 0x10) return SdpSecurity::None;
  throw CodecError(CodecError::Code::Malformed, "invalid SDP security byte");
}

SdpTransport to_transport(std::uint8_t raw) {
  if (raw == 0x00) return SdpTransport::Stream;
  throw CodecError(CodecError::Code::Malformed, "invalid SDP transport byte");
}

}  // namespace

Bytes frame_v2gtp(std::uint16_t payload_type, ByteView payload) {
  if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw CodecError(CodecError::Code::FieldTooLong, "V2GTP payload exceeds 32-bit length");
  }
  auto len = static_cast<std::uint32_t>(payload.size());
  Bytes out;
  out.reserve(kV2gtpHeaderLength + payload.size());
  out.push_back(kV2gtpVersion);
  out.push_back(kV2gtpInverseVersion);
  out.push_back(static_cast<std::uint8_t>(payload_type >> 8));
  out.push_back(static_cast<std::uint8_t>(payload_type));
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

V2gtpFrame parse_v2gtp(ByteView bytes) {
  if (bytes.size() >= 2 && (bytes[0] != kV2gtpVersion || bytes[1] != kV2gtpInverseVersion)) {
    throw CodecError(CodecError::Code::BadVersion, "V2GTP version bytes are not 01 FE");
  }
  if (bytes.size() < kV2gtpHeaderLength) {
    throw CodecError(CodecError::Code::Malformed, "truncated V2GTP header");
  }
  V2gtpFrame frame;
  frame.payload_type = static_cast<std::uint16_t>((bytes[2] << 8) | bytes[3]);
  std::uint64_t declared = (static_cast<std::uint64_t>(bytes[4]) << 24) | (static_cast<std::uint64_t>(bytes[5]) << 16) |
                           (static_cast<std::uint64_t>(bytes[6]) << 8) | bytes[7];
  if (declared != bytes.size() - kV2gtpHeaderLength) {
    throw CodecError(CodecError::Code::LengthMismatch, "V2GTP declares " + std::to_string(declared) +
                                                           " payload bytes, frame carries " +
                                                           std::to_string(bytes.size() - kV2gtpHeaderLength));
  }
  frame.payload.assign(bytes.begin() + kV2gtpHeaderLength, bytes.end());
  return frame;
}

Bytes encode_sdp(const SdpRequest& request) {
  return Bytes{static_cast<std::uint8_t>(request.security), static_cast<std::uint8_t>(request.transport)};
}

Bytes encode_sdp(const SdpResponse& response) {
  if (response.port < kDynamicPortMin) {
    throw CodecError(CodecError::Code::Malformed, "SDP port must be in the dynamic range");
  }
  Bytes out(response.address.begin(), response.address.end());
  out.push_back(static_cast<std::uint8_t>(response.port >> 8));
  out.push_back(static_cast<std::uint8_t>(response.port));
  out.push_back(static_cast<std::uint8_t>(response.security));
  out.push_back(static_cast<std::uint8_t>(response.transport));
  return out;
}

SdpRequest decode_sdp_request(ByteView payload) {
  if (payload.size() != 2) throw CodecError(CodecError::Code::Malformed, "SDP request must be 2 bytes");
  return SdpRequest{to_security(payload[0]), to_transport(payload[1])};
}

SdpResponse decode_sdp_response(ByteView payload) {
  if (payload.size() != 20) throw CodecError(CodecError::Code::Malformed, "SDP response must be 20 bytes");
  SdpResponse r;
  std::copy_n(payload.begin(), 16, r.address.begin());
  r.port = static_cast<std::uint16_t>((payload[16] << 8) | payload[17]);
  if (r.port < kDynamicPortMin) throw CodecError(CodecError::Code::Malformed, "SDP port outside dynamic range");
  r.security = to_security(payload[18]);
  r.transport = to_transport(payload[19]);
  return r;
}

Bytes encode_slac_match(const SlacMatch& match) {
  Bytes out(match.nmk.begin(), match.nmk.end());
  out.insert(out.end(), match.nid.begin(), match.nid.end());
  return out;
}

SlacMatch decode_slac_match(ByteView payload) {
  if (payload.size() != 23) throw CodecError(CodecError::Code::Malformed, "SLAC match payload must be 23 bytes");
  SlacMatch m;
  std::copy_n(payload.begin(), 16, m.nmk.begin());
  std::copy_n(payload.begin() + 16, 7, m.nid.begin());
  return m;
}

}  // namespace pncsim::wire
