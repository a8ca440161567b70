#include "semharq/classic_codec.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace semharq {
namespace {

// Independent CRC-32 oracle: bit-reversed long division by 0x04C11DB7.
uint32_t reverse_bits(uint32_t x) {
  uint32_t r = 0;
  for (int i = 0; i < 32; ++i) r = (r << 1) | ((x >> i) & 1U);
  return r;
}

uint32_t crc32_long_division(const BitString& payload) {
  uint32_t crc = 0xFFFFFFFFU;
  for (size_t i = 0; i < payload.size(); ++i) {
    uint32_t in = static_cast<uint32_t>(payload[i]) << 31;
    if ((crc ^ in) & 0x80000000U)
      crc = (crc << 1) ^ 0x04C11DB7U;
    else
      crc <<= 1;
  }
  return reverse_bits(crc) ^ 0xFFFFFFFFU;
}

BitString ascii_bits(const std::string& text) {
  std::vector<uint8_t> bytes(text.begin(), text.end());
  return bits_from_bytes_lsb_first(bytes);
}

TEST(Crc32, CheckValueOnAscii123456789) {
  EXPECT_EQ(crc32_value(ascii_bits("123456789")), 0xCBF43926U);
}

TEST(Crc32, MatchesLongDivisionOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    BitString payload;
    size_t n = rng() % 300;
    for (size_t i = 0; i < n; ++i) payload.push_back(rng() & 1U);
    EXPECT_EQ(crc32_value(payload), crc32_long_division(payload)) << "trial " << trial;
  }
}

TEST(Crc32, AppendThenCheckAccepts) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    BitString payload;
    size_t n = rng() % 200;
    for (size_t i = 0; i < n; ++i) payload.push_back(rng() & 1U);
    EXPECT_TRUE(crc32_check(crc32_append(payload)));
  }
}

TEST(Crc32, DetectsAllSingleBitFlips) {
  std::mt19937_64 rng(13);
  BitString payload;
  for (size_t i = 0; i < 480; ++i) payload.push_back(rng() & 1U);
  BitString frame = crc32_append(payload);
  for (size_t i = 0; i < frame.size(); ++i) {
    BitString bad = frame;
    bad.flip(i);
    EXPECT_FALSE(crc32_check(bad)) << "bit " << i;
  }
}

TEST(Crc32, DetectsSampledDoubleBitFlips) {
  std::mt19937_64 rng(17);
  BitString payload;
  for (size_t i = 0; i < 480; ++i) payload.push_back(rng() & 1U);
  BitString frame = crc32_append(payload);
  for (int trial = 0; trial < 100000; ++trial) {
    size_t i = rng() % frame.size();
    size_t j = rng() % frame.size();
    if (i == j) continue;
    BitString bad = frame;
    bad.flip(i);
    bad.flip(j);
    ASSERT_FALSE(crc32_check(bad)) << i << "," << j;
  }
}

TEST(Crc32, RejectsWrongCheckWord) {
  BitString frame = BitString::zeros(64);  // zero payload, zero check
  EXPECT_FALSE(crc32_check(frame));        // correct check of zeros is nonzero
}

TEST(Crc32, FrameTooShortRejected) {
  EXPECT_THROW(crc32_check(BitString::zeros(31)), std::invalid_argument);
}

TEST(Huffman, TwoSymbolsGetOneBitEach) {
  auto book = huffman_build({{0, 90}, {1, 10}});
  EXPECT_EQ(book.length_of(0), 1);
  EXPECT_EQ(book.length_of(1), 1);
}

TEST(Huffman, DegenerateAlphabetRejected) {
  EXPECT_THROW(huffman_build({{0, 5}}), std::invalid_argument);
  EXPECT_THROW(huffman_build({{0, 5}, {1, 0}}), std::invalid_argument);
}

// Brute-force oracle: minimum weighted depth over all full binary trees with
// up to four leaves fixes the optimal length profile.
TEST(Huffman, MatchesBruteForceOnFourSymbols) {
  auto book = huffman_build({{0, 5}, {1, 2}, {2, 1}, {3, 1}});
  EXPECT_EQ(book.length_of(0), 1);
  EXPECT_EQ(book.length_of(1), 2);
  EXPECT_EQ(book.length_of(2), 3);
  EXPECT_EQ(book.length_of(3), 3);
  // Exhaustive check over the two distinct 4-leaf tree shapes:
  // balanced {2,2,2,2} costs 18, skewed {1,2,3,3} costs 5+4+3+3 = 15.
  long balanced = 2 * 5 + 2 * 2 + 2 * 1 + 2 * 1;
  long skewed = 1 * 5 + 2 * 2 + 3 * 1 + 3 * 1;
  long got = 0;
  for (auto [symbol, count] : std::vector<std::pair<int, long>>{{0, 5}, {1, 2}, {2, 1}, {3, 1}})
    got += book.length_of(symbol) * count;
  EXPECT_EQ(got, std::min(balanced, skewed));
}

TEST(Huffman, PrefixFreeAndKraftSum) {
  std::map<int, uint64_t> freq;
  std::mt19937_64 rng(3);
  for (int s = 0; s < 40; ++s) freq[s] = 1 + rng() % 500;
  auto book = huffman_build(freq);
  double kraft = 0.0;
  for (const auto& e : book.entries()) kraft += std::pow(2.0, -e.length);
  EXPECT_LE(kraft, 1.0 + 1e-12);
  for (const auto& a : book.entries())
    for (const auto& b : book.entries()) {
      if (a.symbol == b.symbol || a.length > b.length) continue;
      EXPECT_NE(b.code >> (b.length - a.length), a.code)
          << a.symbol << " prefixes " << b.symbol;
    }
}

TEST(Huffman, AverageLengthWithinOneBitOfEntropy) {
  std::map<int, uint64_t> freq;
  std::mt19937_64 rng(5);
  uint64_t total = 0;
  for (int s = 0; s < 64; ++s) {
    freq[s] = 1 + rng() % 1000;
    total += freq[s];
  }
  auto book = huffman_build(freq);
  double entropy = 0.0, avg = 0.0;
  for (const auto& [s, c] : freq) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    entropy -= p * std::log2(p);
    avg += p * book.length_of(s);
  }
  EXPECT_GE(avg, entropy - 1e-9);
  EXPECT_LT(avg, entropy + 1.0);
}

TEST(Huffman, EncodeDecodeSentences) {
  std::map<int, uint64_t> freq{{Vocabulary::kEos, 10}, {3, 7}, {4, 5}, {5, 2}, {6, 1}};
  auto book = huffman_build(freq);
  Sentence s({3, 4, 5, 6, 4, 3, 0, 0}, 6);
  auto bits = huffman_encode(s, book);
  auto back = huffman_decode(bits, book, 8);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, s);
}

TEST(Huffman, UnknownSymbolRejected) {
  auto book = huffman_build({{Vocabulary::kEos, 1}, {3, 1}});
  Sentence s({3, 99, 0, 0}, 2);
  EXPECT_THROW(huffman_encode(s, book), std::invalid_argument);
}

TEST(Huffman, EmptyPayloadIsJustEos) {
  auto book = huffman_build({{Vocabulary::kEos, 1}, {3, 1}});
  Sentence s(std::vector<int>(4, 0), 0);
  auto bits = huffman_encode(s, book);
  EXPECT_EQ(static_cast<int>(bits.size()), book.length_of(Vocabulary::kEos));
}

TEST(Huffman, CsvRoundTrip) {
  std::map<int, uint64_t> freq{{2, 10}, {3, 7}, {4, 5}, {5, 2}};
  auto book = huffman_build(freq);
  auto restored = HuffmanCodebook::from_csv(book.to_csv());
  for (const auto& e : book.entries()) {
    EXPECT_EQ(restored.length_of(e.symbol), e.length);
    EXPECT_EQ(restored.code_of(e.symbol), e.code);
  }
}

TEST(BitString, ExactLengthUnderConcatAndSlice) {
  BitString a = BitString::zeros(13);
  BitString b;
  b.push_back(1);
  b.push_back(0);
  BitString c = a + b;
  EXPECT_EQ(c.size(), 15u);
  EXPECT_EQ(c.slice(13, 15).to_string(), "10");
  EXPECT_EQ(c.slice(0, 13), a);
}

}  // namespace
}  // namespace semharq
