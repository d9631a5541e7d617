// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian byte packing for the binary formats. Internal header.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "molfield/error.hpp"

namespace molfield::detail {

template <class U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xff));
    }
    return out;
  } else {
    return v;
  }
}

class ByteWriter {
 public:
  void tag(std::string_view four) { out_.append(four.substr(0, 4)); }
  void u32(std::uint32_t v) { put(to_little(v)); }
  void i32(std::int32_t v) { put(to_little(static_cast<std::uint32_t>(v))); }
  void u64(std::uint64_t v) { put(to_little(v)); }
  void f64(double v) { put(to_little(std::bit_cast<std::uint64_t>(v))); }
  void f32(float v) { put(to_little(std::bit_cast<std::uint32_t>(v))); }
  void bytes(std::string_view s) { out_.append(s); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

  std::string& buffer() { return out_; }
  std::string take() { return std::move(out_); }

 private:
  template <class U>
  void put(U v) {
    char raw[sizeof(U)];
    std::memcpy(raw, &v, sizeof(U));
    out_.append(raw, sizeof(U));
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data, std::string what = "stream")
      : data_(data), what_(std::move(what)) {}

  std::string_view tag() { return take(4); }
  std::uint32_t u32() { return to_little(get<std::uint32_t>()); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() { return to_little(get<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const auto n = u32();
    return std::string(take(n));
  }
  std::string_view take(std::size_t n) {
    if (remaining() < n) {
      throw FormatError(what_ + " truncated at byte " + std::to_string(pos_) + ": need " +
                        std::to_string(n) + " more bytes, have " + std::to_string(remaining()));
    }
    const auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  template <class U>
  U get() {
    const auto raw = take(sizeof(U));
    U v;
    std::memcpy(&v, raw.data(), sizeof(U));
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace molfield::detail
