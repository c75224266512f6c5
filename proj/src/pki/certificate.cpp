// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/pki/certificate.hpp"

#include <bit>
#include <cmath>

#include "pncsim/wire/tlv.hpp"

namespace pncsim::pki {

namespace {

using wire::CodecError;

constexpr std::uint8_t kCertificateTag = 0x40;
constexpr std::uint8_t kCrlTag = 0x41;

[[noreturn]] void malformed(const std::string& what) { throw CodecError(CodecError::Code::Malformed, what); }

void put_f64(Bytes& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (56 - 8 * i)));
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

wire::TlvWriter write_tbs(const Certificate& cert) {
  wire::TlvWriter w(kCertificateTag);
  w.u64(0x01, cert.serial);
  w.text(0x02, cert.subject_id);
  w.u8(0x03, static_cast<std::uint8_t>(cert.role));
  w.field(0x04, cert.public_key);
  w.i64(0x05, cert.not_before);
  w.i64(0x06, cert.not_after);
  Bytes geo;
  if (cert.geo) {
    put_f64(geo, cert.geo->latitude);
    put_f64(geo, cert.geo->longitude);
  }
  w.field(0x07, geo);
  w.text(0x08, cert.issuer_id);
  return w;
}

Role to_role(std::uint8_t raw) {
  if (raw < 0x01 || raw > 0x05) malformed("unknown certificate role " + std::to_string(raw));
  return static_cast<Role>(raw);
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Root:
      return "Root";
    case Role::IntermediateCA:
      return "IntermediateCA";
    case Role::StationLeaf:
      return "StationLeaf";
    case Role::ContractLeaf:
      return "ContractLeaf";
    case Role::VehicleLeaf:
      return "VehicleLeaf";
  }
  return "Unknown";
}

bool is_authority_role(Role role) { return role == Role::Root || role == Role::IntermediateCA; }

bool is_valid(const GeoPoint& p) {
  return p.latitude >= -90.0 && p.latitude <= 90.0 && p.longitude >= -180.0 && p.longitude <= 180.0;
}

Bytes tbs_bytes(const Certificate& cert) { return std::move(write_tbs(cert)).finish(); }

Bytes encode_certificate(const Certificate& cert) {
  auto w = write_tbs(cert);
  w.field(0x09, cert.signature);
  return std::move(w).finish();
}

Certificate decode_certificate(ByteView bytes) {
  wire::TlvReader r(bytes);
  if (r.message_tag() != kCertificateTag) malformed("not a certificate");
  Certificate cert;
  cert.serial = r.u64(0x01);
  cert.subject_id = r.text(0x02);
  cert.role = to_role(r.u8(0x03));
  cert.public_key = r.fixed<33>(0x04);
  cert.not_before = r.i64(0x05);
  cert.not_after = r.i64(0x06);
  Bytes geo = r.field(0x07);
  if (geo.size() == 16) {
    GeoPoint p{get_f64(geo.data()), get_f64(geo.data() + 8)};
    if (!is_valid(p)) malformed("geo coordinates out of range");
    cert.geo = p;
  } else if (!geo.empty()) {
    malformed("geo extension must be empty or 16 bytes");
  }
  cert.issuer_id = r.text(0x08);
  cert.signature = r.fixed<64>(0x09);
  r.finish();
  if (cert.not_before >= cert.not_after) malformed("not_before must precede not_after");
  if (cert.public_key[0] != 0x02 && cert.public_key[0] != 0x03) malformed("public key is not a compressed point");
  return cert;
}

bool key_matches(const Credential& credential) {
  try {
    return public_key_of(credential.private_key) == credential.certificate.public_key;
  } catch (const CryptoError&) {
    return false;
  }
}

Bytes encode_crl(const RevocationList& crl) {
  wire::TlvWriter w(kCrlTag);
  w.text(0x01, crl.issuer_id);
  w.i64(0x02, crl.issued_at);
  std::vector<Bytes> revoked;
  for (const auto& s : crl.revoked) revoked.push_back(to_bytes(s));
  w.list(0x03, revoked);
  return std::move(w).finish();
}

RevocationList decode_crl(ByteView bytes) {
  wire::TlvReader r(bytes);
  if (r.message_tag() != kCrlTag) malformed("not a revocation list");
  RevocationList crl;
  crl.issuer_id = r.text(0x01);
  crl.issued_at = r.i64(0x02);
  std::string previous;
  bool first = true;
  for (const auto& item : r.list(0x03)) {
    std::string s = to_string(item);
    // Strictly ascending keeps the encoding canonical.
    if (!first && s <= previous) malformed("revoked entries must be sorted and unique");
    crl.revoked.insert(s);
    previous = std::move(s);
    first = false;
  }
  r.finish();
  return crl;
}

}  // namespace pncsim::pki
