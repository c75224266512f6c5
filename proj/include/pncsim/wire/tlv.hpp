// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pncsim/bytes.hpp"

namespace pncsim::wire {

class CodecError : public std::runtime_error {
 public:
  enum class Code { Malformed, FieldTooLong, BadVersion, LengthMismatch };
  CodecError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

inline constexpr std::size_t kMaxFieldLength = 0xffff;

/// Canonical tag-length-value layout shared by application messages,
/// certificates, CRLs and handshake records:
///
///   message := tag(1) field*
///   field   := field_tag(1) length(2, BE) value
///   list    := field_tag(1) count(2, BE) (length(2, BE) value)*
///
/// Fields appear in declaration order, every field is mandatory, and a
/// decoder accepts nothing but that exact sequence. Encoding is therefore
/// injective and decode(encode(x)) reproduces the original bytes.
class TlvWriter {
 public:
  explicit TlvWriter(std::uint8_t message_tag) { out_.push_back(message_tag); }

  TlvWriter& field(std::uint8_t tag, ByteView value);
  TlvWriter& text(std::uint8_t tag, std::string_view value);
  TlvWriter& u8(std::uint8_t tag, std::uint8_t value);
  TlvWriter& u64(std::uint8_t tag, std::uint64_t value);
  TlvWriter& i64(std::uint8_t tag, std::int64_t value) { return u64(tag, static_cast<std::uint64_t>(value)); }
  TlvWriter& list(std::uint8_t tag, const std::vector<Bytes>& items);

  Bytes finish() && { return std::move(out_); }
  const Bytes& bytes() const { return out_; }

 private:
  void put_u16(std::size_t value);
  Bytes out_;
};

class TlvReader {
 public:
  /// Throws Malformed on empty input.
  explicit TlvReader(ByteView data);

  std::uint8_t message_tag() const { return tag_; }

  Bytes field(std::uint8_t tag);
  std::string text(std::uint8_t tag);
  std::uint8_t u8(std::uint8_t tag);
  std::uint64_t u64(std::uint8_t tag);
  std::int64_t i64(std::uint8_t tag) { return static_cast<std::int64_t>(u64(tag)); }
  std::vector<Bytes> list(std::uint8_t tag);

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed(std::uint8_t tag) {
    Bytes value = field(tag);
    if (value.size() != N) {
      throw CodecError(CodecError::Code::Malformed, "field " + std::to_string(tag) + " must be " +
                                                         std::to_string(N) + " bytes");
    }
    std::array<std::uint8_t, N> out{};
    std::copy(value.begin(), value.end(), out.begin());
    return out;
  }

  bool at_end() const { return pos_ == data_.size(); }
  /// Trailing bytes are an error.
  void finish() const;

 private:
  std::size_t get_u16();
  void expect_tag(std::uint8_t tag);

  ByteView data_;
  std::size_t pos_ = 0;
  std::uint8_t tag_ = 0;
};

}  // namespace pncsim::wire
