#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/bitstring.hpp"
#include "semharq/corpus.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// Huffman coding over the word-id alphabet (canonical code assignment).
// ---------------------------------------------------------------------------

class HuffmanCodebook {
 public:
  struct Entry {
    int symbol;
    int length;
    uint64_t code;  // canonical, MSB-first
  };

  const std::vector<Entry>& entries() const { return entries_; }

  bool contains(int symbol) const {
    return symbol >= 0 && static_cast<size_t>(symbol) < length_of_.size() &&
           length_of_[symbol] > 0;
  }

  int length_of(int symbol) const { return length_of_[symbol]; }
  uint64_t code_of(int symbol) const { return code_of_[symbol]; }

  // Built from a lengths profile: canonical codes are assigned in
  // (length, symbol) order.
  static HuffmanCodebook from_lengths(const std::vector<std::pair<int, int>>& symbol_lengths) {
    HuffmanCodebook book;
    std::vector<std::pair<int, int>> order = symbol_lengths;  // (symbol, length)
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second < b.second;
      return a.first < b.first;
    });
    uint64_t code = 0;
    int prev_len = 0;
    int max_symbol = 0;
    for (const auto& [symbol, length] : order) max_symbol = std::max(max_symbol, symbol);
    book.length_of_.assign(max_symbol + 1, 0);
    book.code_of_.assign(max_symbol + 1, 0);
    for (const auto& [symbol, length] : order) {
      if (length <= 0 || length > 63) throw std::invalid_argument("bad code length");
      code <<= (length - prev_len);
      prev_len = length;
      book.entries_.push_back({symbol, length, code});
      book.length_of_[symbol] = length;
      book.code_of_[symbol] = code;
      ++code;
    }
    book.build_decode_index();
    return book;
  }

  // Decode one symbol starting at bit offset `pos`; advances pos.
  std::optional<int> decode_symbol(const BitString& bits, size_t& pos) const {
    uint64_t code = 0;
    int length = 0;
    while (pos < bits.size() && length < 64) {
      code = (code << 1) | bits[pos];
      ++pos;
      ++length;
      auto it = decode_index_.find({length, code});
      if (it != decode_index_.end()) return it->second;
    }
    return std::nullopt;
  }

  // CSV serialization: one "id,length" row per symbol.
  std::string to_csv() const {
    std::ostringstream out;
    for (const auto& e : entries_) out << e.symbol << ',' << e.length << '\n';
    return out.str();
  }

  static HuffmanCodebook from_csv(const std::string& csv) {
    std::vector<std::pair<int, int>> lengths;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      size_t comma = line.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("bad codebook row");
      lengths.emplace_back(std::stoi(line.substr(0, comma)), std::stoi(line.substr(comma + 1)));
    }
    return from_lengths(lengths);
  }

 private:
  void build_decode_index() {
    for (const auto& e : entries_) decode_index_[{e.length, e.code}] = e.symbol;
  }

  std::vector<Entry> entries_;
  std::vector<int> length_of_;
  std::vector<uint64_t> code_of_;
  std::map<std::pair<int, uint64_t>, int> decode_index_;
};

// Builds an optimal prefix code. Tie-break: among equal weights, the group
// containing the smallest symbol id merges first, so the tree is unique.
inline HuffmanCodebook huffman_build(const std::map<int, uint64_t>& frequencies) {
  std::vector<std::pair<int, uint64_t>> active;
  for (const auto& [symbol, count] : frequencies)
    if (count > 0) active.emplace_back(symbol, count);
  if (active.size() < 2) throw std::invalid_argument("degenerate alphabet");

  struct Group {
    uint64_t weight;
    int min_symbol;
    std::vector<int> symbols;
  };
  auto cmp = [](const Group& a, const Group& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.min_symbol > b.min_symbol;
  };
  std::priority_queue<Group, std::vector<Group>, decltype(cmp)> heap(cmp);
  std::vector<int> depth_of;
  int max_symbol = 0;
  for (const auto& [symbol, count] : active) max_symbol = std::max(max_symbol, symbol);
  depth_of.assign(max_symbol + 1, 0);
  for (const auto& [symbol, count] : active) heap.push({count, symbol, {symbol}});

  while (heap.size() > 1) {
    Group a = heap.top();
    heap.pop();
    Group b = heap.top();
    heap.pop();
    Group merged;
    merged.weight = a.weight + b.weight;
    merged.min_symbol = std::min(a.min_symbol, b.min_symbol);
    merged.symbols = std::move(a.symbols);
    merged.symbols.insert(merged.symbols.end(), b.symbols.begin(), b.symbols.end());
    for (int s : merged.symbols) ++depth_of[s];
    heap.push(std::move(merged));
  }

  std::vector<std::pair<int, int>> lengths;
  for (const auto& [symbol, count] : active) lengths.emplace_back(symbol, depth_of[symbol]);
  return HuffmanCodebook::from_lengths(lengths);
}

// Encodes the sentence's words followed by EOS.
inline BitString huffman_encode(const Sentence& s, const HuffmanCodebook& book) {
  BitString out;
  auto emit = [&](int symbol) {
    if (!book.contains(symbol)) throw std::invalid_argument("symbol not in codebook");
    int length = book.length_of(symbol);
    uint64_t code = book.code_of(symbol);
    for (int i = length - 1; i >= 0; --i) out.push_back((code >> i) & 1U);
  };
  for (int id : s.words()) emit(id);
  emit(Vocabulary::kEos);
  return out;
}

// Reads codewords until EOS. Returns nullopt on malformed input (invalid
// codeword, missing EOS, or word count outside [0, frame_length]).
inline std::optional<Sentence> huffman_decode(const BitString& bits, const HuffmanCodebook& book,
                                              int frame_length) {
  std::vector<int> words;
  size_t pos = 0;
  while (true) {
    auto symbol = book.decode_symbol(bits, pos);
    if (!symbol) return std::nullopt;
    if (*symbol == Vocabulary::kEos) break;
    if (static_cast<int>(words.size()) == frame_length) return std::nullopt;
    words.push_back(*symbol);
  }
  int count = static_cast<int>(words.size());
  words.resize(frame_length, Vocabulary::kPad);
  return Sentence(std::move(words), count);
}

// ---------------------------------------------------------------------------
// CRC-32 (reflected IEEE polynomial, init all-ones, final xor all-ones),
// computed bit-serially so frames need not be byte aligned. Byte payloads map
// to bits LSB-first to match the standard byte-oriented check values.
// ---------------------------------------------------------------------------

inline constexpr uint32_t kCrc32ReflectedPoly = 0xEDB88320U;
inline constexpr int kCrcBits = 32;

inline uint32_t crc32_value(const BitString& payload) {
  uint32_t crc = 0xFFFFFFFFU;
  for (size_t i = 0; i < payload.size(); ++i) {
    uint32_t in = (crc ^ payload[i]) & 1U;
    crc >>= 1;
    if (in) crc ^= kCrc32ReflectedPoly;
  }
  return crc ^ 0xFFFFFFFFU;
}

inline BitString bits_from_bytes_lsb_first(const std::vector<uint8_t>& bytes) {
  BitString out;
  for (uint8_t byte : bytes)
    for (int i = 0; i < 8; ++i) out.push_back((byte >> i) & 1U);
  return out;
}

// The 32 check bits are appended LSB-first.
inline BitString crc32_check_bits(const BitString& payload) {
  uint32_t crc = crc32_value(payload);
  BitString out;
  for (int i = 0; i < kCrcBits; ++i) out.push_back((crc >> i) & 1U);
  return out;
}

inline BitString crc32_append(const BitString& payload) {
  return payload + crc32_check_bits(payload);
}

inline bool crc32_check(const BitString& frame) {
  if (frame.size() < static_cast<size_t>(kCrcBits))
    throw std::invalid_argument("frame too short");
  BitString payload = frame.slice(0, frame.size() - kCrcBits);
  BitString check = frame.slice(frame.size() - kCrcBits, frame.size());
  return crc32_check_bits(payload) == check;
}

}  // namespace semharq
