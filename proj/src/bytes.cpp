// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/bytes.hpp"

#include <cctype>
#include <stdexcept>

namespace pncsim {

namespace {

constexpr char kHexDigits[] = "0123456789ABCDEF";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw std::invalid_argument("hex string has odd length");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw std::invalid_argument("invalid hex digit");
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string format_mac(const Mac& mac) {
  std::string out;
  for (std::size_t i = 0; i < mac.size(); ++i) {
    if (i != 0) out.push_back(':');
    out.push_back(static_cast<char>(std::tolower(kHexDigits[mac[i] >> 4])));
    out.push_back(static_cast<char>(std::tolower(kHexDigits[mac[i] & 0x0f])));
  }
  return out;
}

Mac parse_mac(std::string_view text) {
  Mac mac{};
  if (text.size() != 17) {
    throw std::invalid_argument("MAC must look like aa:bb:cc:dd:ee:ff");
  }
  for (std::size_t i = 0; i < 6; ++i) {
    if (i != 0 && text[i * 3 - 1] != ':') {
      throw std::invalid_argument("MAC must look like aa:bb:cc:dd:ee:ff");
    }
    int hi = hex_value(text[i * 3]);
    int lo = hex_value(text[i * 3 + 1]);
    if (hi < 0 || lo < 0) {
      throw std::invalid_argument("invalid hex digit in MAC");
    }
    mac[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return mac;
}

std::string format_ipv6(const Ipv6& addr) {
  std::string out;
  for (std::size_t i = 0; i < addr.size(); i += 2) {
    if (i != 0) out.push_back(':');
    for (std::size_t j = i; j < i + 2; ++j) {
      out.push_back(static_cast<char>(std::tolower(kHexDigits[addr[j] >> 4])));
      out.push_back(static_cast<char>(std::tolower(kHexDigits[addr[j] & 0x0f])));
    }
  }
  return out;
}

}  // namespace pncsim
