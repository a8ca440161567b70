#include "semharq/corpus.hpp"

#include <gtest/gtest.h>

namespace semharq {
namespace {

std::vector<std::vector<std::string>> toks(std::initializer_list<std::string> lines) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : lines) out.push_back(tokenize(line));
  return out;
}

TEST(Vocabulary, FrequencyOrderWithReservedIds) {
  auto vocab = build_vocabulary(toks({"a b", "a"}), 10);
  EXPECT_EQ(vocab.size(), 5);
  EXPECT_EQ(vocab.token_of(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(vocab.token_of(Vocabulary::kUnk), "<unk>");
  EXPECT_EQ(vocab.token_of(Vocabulary::kEos), "<eos>");
  EXPECT_EQ(vocab.id_of("a"), 3);  // more frequent -> lower non-reserved id
  EXPECT_EQ(vocab.id_of("b"), 4);
}

TEST(Vocabulary, TiesBrokenLexicographically) {
  auto vocab = build_vocabulary(toks({"zebra apple", "zebra apple"}), 10);
  EXPECT_EQ(vocab.id_of("apple"), 3);
  EXPECT_EQ(vocab.id_of("zebra"), 4);
}

TEST(Vocabulary, CapsAtMaxSize) {
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back({"w" + std::to_string(i)});
  auto vocab = build_vocabulary(corpus, 30);
  EXPECT_EQ(vocab.size(), 30);
}

TEST(Vocabulary, LeastFrequentTokensFallOffToUnk) {
  // 5 distinct tokens, room for 3: the two least frequent map to UNK.
  auto corpus = toks({"a a a b b c c d e"});
  auto vocab = build_vocabulary(corpus, 6);
  EXPECT_EQ(vocab.size(), 6);
  EXPECT_TRUE(vocab.contains("a"));
  EXPECT_TRUE(vocab.contains("b"));
  EXPECT_TRUE(vocab.contains("c"));
  EXPECT_FALSE(vocab.contains("d"));
  EXPECT_FALSE(vocab.contains("e"));
  auto s = encode_sentence({"a", "d", "e", "b"}, vocab, 8);
  EXPECT_EQ(s.ids[1], Vocabulary::kUnk);
  EXPECT_EQ(s.ids[2], Vocabulary::kUnk);
}

TEST(Vocabulary, EmptyCorpusRejected) {
  EXPECT_THROW(build_vocabulary({}, 10), std::invalid_argument);
}

TEST(EncodeSentence, PadsToFrameLength) {
  auto vocab = build_vocabulary(toks({"one two three four five"}), 32);
  auto s = encode_sentence({"one", "two", "three", "four", "five"}, vocab, 30);
  EXPECT_EQ(s.padded_length(), 30);
  EXPECT_EQ(s.length, 5);
  for (int i = 5; i < 30; ++i) EXPECT_EQ(s.ids[i], Vocabulary::kPad);
}

TEST(EncodeSentence, AllUnknownMapsToUnk) {
  auto vocab = build_vocabulary(toks({"x y"}), 8);
  auto s = encode_sentence({"q", "r", "t", "u"}, vocab, 8);
  EXPECT_EQ(s.words(), (std::vector<int>{1, 1, 1, 1}));
}

TEST(EncodeSentence, LengthOutOfRangeRejected) {
  auto vocab = build_vocabulary(toks({"a b c"}), 8);
  EXPECT_THROW(encode_sentence({"a", "b", "c"}, vocab, 8), std::invalid_argument);
  EXPECT_THROW(encode_sentence(std::vector<std::string>(9, "a"), vocab, 8), std::invalid_argument);
}

TEST(EncodeSentence, RoundTripIsIdentity) {
  auto lines = toks({"the cat sat down", "a dog ran far away today"});
  auto vocab = build_vocabulary(lines, 32);
  for (const auto& tokens : lines) {
    auto s = encode_sentence(tokens, vocab, 12);
    EXPECT_EQ(decode_sentence(s, vocab), tokens);
  }
}

TEST(Symbols, BigEndianLayout) {
  Sentence s({5, 7, 0, 0}, 2);
  auto bytes = sentence_to_symbols(s);
  EXPECT_EQ(bytes, (std::vector<uint8_t>{0x00, 0x05, 0x00, 0x07}));
}

TEST(Symbols, LengthIsTwiceWordCount) {
  std::vector<int> ids(30, 9);
  Sentence s(ids, 30);
  EXPECT_EQ(sentence_to_symbols(s).size(), 60u);
}

TEST(Symbols, RoundTrip) {
  Sentence s({3, 100, 77, 4, 0, 0, 0, 0}, 4);
  auto back = symbols_to_sentence(sentence_to_symbols(s), 8, 128);
  EXPECT_EQ(back, s);
}

TEST(Symbols, OutOfVocabIdsClampToUnk) {
  auto back = symbols_to_sentence({0x01, 0x00}, 4, 128);  // id 256
  EXPECT_EQ(back.ids[0], Vocabulary::kUnk);
}

TEST(Tokenize, LowercasesAndStripsPunctuation) {
  EXPECT_EQ(tokenize("The CAT, sat!"), (std::vector<std::string>{"the", "cat", "sat"}));
}

}  // namespace
}  // namespace semharq
