// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pncsim {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

using Mac = std::array<std::uint8_t, 6>;
using Ipv6 = std::array<std::uint8_t, 16>;

/// Virtual time, nanoseconds since scenario start.
using Nanos = std::int64_t;

inline constexpr Nanos kMillisecond = 1'000'000;
inline constexpr Nanos kSecond = 1'000'000'000;

/// Uppercase hex, no separators.
std::string to_hex(ByteView data);

/// Accepts upper- or lowercase hex; throws std::invalid_argument on odd
/// length or non-hex characters.
Bytes from_hex(std::string_view hex);

std::string format_mac(const Mac& mac);
Mac parse_mac(std::string_view text);

/// Full (uncompressed) textual form, eight groups of four lowercase digits.
std::string format_ipv6(const Ipv6& addr);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

template <std::size_t N>
Bytes to_bytes(const std::array<std::uint8_t, N>& a) {
  return Bytes(a.begin(), a.end());
}

/// Seeded random source shared by everything inside one scenario run.
/// std::mt19937_64 is fully specified by the standard, so a seed yields the
/// same byte stream on every conforming platform.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  void fill(std::span<std::uint8_t> out) {
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t word = engine_();
      for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(word >> (8 * b));
      }
    }
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pncsim
