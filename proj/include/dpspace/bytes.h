// Copyright 2026 The dpspace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fixed-width little-endian byte codec and an MSB-first bit packer.
// No varints and no compression: encoded lengths are what gets measured.

#ifndef DPSPACE_BYTES_H_
#define DPSPACE_BYTES_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpspace {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteWriter {
 public:
  void PutU8(uint8_t v) { bytes_.push_back(v); }
  void PutU32(uint32_t v) { PutLE(v, 4); }
  void PutU64(uint64_t v) { PutLE(v, 8); }
  void PutI64(int64_t v) { PutLE(static_cast<uint64_t>(v), 8); }
  void PutF64(double v) { PutLE(std::bit_cast<uint64_t>(v), 8); }

  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> Release() { return std::move(bytes_); }

 private:
  void PutLE(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint8_t GetU8() { return static_cast<uint8_t>(GetLE(1)); }
  uint32_t GetU32() { return static_cast<uint32_t>(GetLE(4)); }
  uint64_t GetU64() { return GetLE(8); }
  int64_t GetI64() { return static_cast<int64_t>(GetLE(8)); }
  double GetF64() { return std::bit_cast<double>(GetLE(8)); }

  bool AtEnd() const { return pos_ == bytes_.size(); }
  size_t remaining() const { return bytes_.size() - pos_; }

  // Throws unless every byte has been consumed.
  void ExpectEnd() const {
    if (!AtEnd()) throw DecodeError("trailing bytes in encoded state");
  }

 private:
  uint64_t GetLE(int n) {
    if (remaining() < static_cast<size_t>(n)) {
      throw DecodeError("truncated encoded state");
    }
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

// Packs values of arbitrary width (<= 64 bits), MSB first. bit_length() is
// exact; the final byte is zero-padded.
class BitWriter {
 public:
  void Put(uint64_t value, unsigned width);
  uint64_t bit_length() const { return bits_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> Release() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const uint8_t> bytes, uint64_t bit_length)
      : bytes_(bytes), bit_length_(bit_length) {}
  uint64_t Get(unsigned width);
  uint64_t remaining() const { return bit_length_ - pos_; }

 private:
  std::span<const uint8_t> bytes_;
  uint64_t bit_length_;
  uint64_t pos_ = 0;
};

inline void BitWriter::Put(uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1U) bytes_.back() |= static_cast<uint8_t>(0x80U >> (bits_ % 8));
    ++bits_;
  }
}

inline uint64_t BitReader::Get(unsigned width) {
  if (remaining() < width) throw DecodeError("truncated bit string");
  uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i, ++pos_) {
    v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U);
  }
  return v;
}

}  // namespace dpspace

#endif  // DPSPACE_BYTES_H_
