// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 Contributors to pncsim
#include "pncsim/wire/tlv.hpp"

namespace pncsim::wire {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw CodecError(CodecError::Code::Malformed, what); }

}  // namespace

void TlvWriter::put_u16(std::size_t value) {
  out_.push_back(static_cast<std::uint8_t>(value >> 8));
  out_.push_back(static_cast<std::uint8_t>(value));
}

TlvWriter& TlvWriter::field(std::uint8_t tag, ByteView value) {
  if (value.size() > kMaxFieldLength) {
    throw CodecError(CodecError::Code::FieldTooLong,
                     "field " + std::to_string(tag) + " is " + std::to_string(value.size()) + " bytes");
  }
  out_.push_back(tag);
  put_u16(value.size());
  out_.insert(out_.end(), value.begin(), value.end());
  return *this;
}

TlvWriter& TlvWriter::text(std::uint8_t tag, std::string_view value) {
  return field(tag, ByteView(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()));
}

TlvWriter& TlvWriter::u8(std::uint8_t tag, std::uint8_t value) { return field(tag, ByteView(&value, 1)); }

TlvWriter& TlvWriter::u64(std::uint8_t tag, std::uint64_t value) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 0; i < 8; ++i) be[i] = static_cast<std::uint8_t>(value >> (56 - 8 * i));
  return field(tag, be);
}

TlvWriter& TlvWriter::list(std::uint8_t tag, const std::vector<Bytes>& items) {
  if (items.size() > kMaxFieldLength) {
    throw CodecError(CodecError::Code::FieldTooLong, "list " + std::to_string(tag) + " has too many elements");
  }
  for (const auto& item : items) {
    if (item.size() > kMaxFieldLength) {
      throw CodecError(CodecError::Code::FieldTooLong, "list element in " + std::to_string(tag) + " too long");
    }
  }
  out_.push_back(tag);
  put_u16(items.size());
  for (const auto& item : items) {
    put_u16(item.size());
    out_.insert(out_.end(), item.begin(), item.end());
  }
  return *this;
}

TlvReader::TlvReader(ByteView data) : data_(data) {
  if (data_.empty()) malformed("empty message");
  tag_ = data_[0];
  pos_ = 1;
}

std::size_t TlvReader::get_u16() {
  if (data_.size() - pos_ < 2) malformed("truncated length");
  std::size_t v = (static_cast<std::size_t>(data_[pos_]) << 8) | data_[pos_ + 1];
  pos_ += 2;
  return v;
}

void TlvReader::expect_tag(std::uint8_t tag) {
  if (pos_ >= data_.size()) malformed("missing field " + std::to_string(tag));
  if (data_[pos_] != tag) {
    malformed("expected field " + std::to_string(tag) + ", found " + std::to_string(data_[pos_]));
  }
  ++pos_;
}

Bytes TlvReader::field(std::uint8_t tag) {
  expect_tag(tag);
  std::size_t len = get_u16();
  if (data_.size() - pos_ < len) malformed("truncated field " + std::to_string(tag));
  Bytes value(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
  pos_ += len;
  return value;
}

std::string TlvReader::text(std::uint8_t tag) { return to_string(field(tag)); }

std::uint8_t TlvReader::u8(std::uint8_t tag) { return fixed<1>(tag)[0]; }

std::uint64_t TlvReader::u64(std::uint8_t tag) {
  auto be = fixed<8>(tag);
  std::uint64_t v = 0;
  for (auto b : be) v = (v << 8) | b;
  return v;
}

std::vector<Bytes> TlvReader::list(std::uint8_t tag) {
  expect_tag(tag);
  std::size_t count = get_u16();
  std::vector<Bytes> items;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t len = get_u16();
    if (data_.size() - pos_ < len) malformed("truncated list element");
    items.emplace_back(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                       data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
  }
  return items;
}

void TlvReader::finish() const {
  if (!at_end()) malformed(std::to_string(data_.size() - pos_) + " trailing bytes");
}

}  // namespace pncsim::wire
