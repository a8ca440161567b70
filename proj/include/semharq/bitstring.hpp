#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace semharq {

// Ordered 0/1 sequence with exact bit-length bookkeeping (never rounded to
// bytes). Concatenation and slicing preserve exact lengths.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
    for (uint8_t b : bits_) {
      if (b > 1) throw std::invalid_argument("bit value out of range");
    }
  }

  static BitString zeros(size_t n) { return BitString(std::vector<uint8_t>(n, 0)); }

  // Bytes unpacked MSB-first (bit 7 of bytes[0] comes first).
  static BitString from_bytes_msb(const std::vector<uint8_t>& bytes) {
    BitString out;
    out.bits_.reserve(bytes.size() * 8);
    for (uint8_t byte : bytes)
      for (int i = 7; i >= 0; --i) out.bits_.push_back((byte >> i) & 1U);
    return out;
  }

  // Inverse of from_bytes_msb; requires size() % 8 == 0.
  std::vector<uint8_t> to_bytes_msb() const {
    if (bits_.size() % 8 != 0) throw std::invalid_argument("bit count not byte aligned");
    std::vector<uint8_t> bytes(bits_.size() / 8, 0);
    for (size_t i = 0; i < bits_.size(); ++i)
      bytes[i / 8] = static_cast<uint8_t>((bytes[i / 8] << 1) | bits_[i]);
    return bytes;
  }

  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  uint8_t operator[](size_t i) const { return bits_[i]; }
  void set(size_t i, uint8_t v) { bits_[i] = v & 1U; }
  void flip(size_t i) { bits_[i] ^= 1U; }
  void push_back(uint8_t b) { bits_.push_back(b & 1U); }

  void append(const BitString& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
  }

  BitString slice(size_t begin, size_t end) const {
    if (begin > end || end > bits_.size()) throw std::out_of_range("bad slice bounds");
    return BitString(std::vector<uint8_t>(bits_.begin() + begin, bits_.begin() + end));
  }

  const std::vector<uint8_t>& bits() const { return bits_; }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (uint8_t b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const BitString& a, const BitString& b) = default;

 private:
  std::vector<uint8_t> bits_;
};

inline BitString operator+(const BitString& a, const BitString& b) {
  BitString out = a;
  out.append(b);
  return out;
}

}  // namespace semharq
