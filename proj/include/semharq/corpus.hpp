#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace semharq {

// Word lookup table. Ids 0..2 are reserved; regular tokens get ids assigned
// by descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kEos = 2;
  static constexpr int kReserved = 3;

  Vocabulary() : id_to_token_{"<pad>", "<unk>", "<eos>"} {}

  int size() const { return static_cast<int>(id_to_token_.size()); }

  int id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

  const std::string& token_of(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("word id out of range");
    return id_to_token_[id];
  }

  void add_token(const std::string& token) {
    if (token_to_id_.count(token)) return;
    token_to_id_.emplace(token, size());
    id_to_token_.push_back(token);
  }

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Integer word-id vector of fixed frame length L; ids[length..L) are PAD.
struct Sentence {
  std::vector<int> ids;
  int length = 0;  // word count before padding

  Sentence() = default;
  Sentence(std::vector<int> padded_ids, int word_count)
      : ids(std::move(padded_ids)), length(word_count) {
    if (length < 0 || static_cast<size_t>(length) > ids.size())
      throw std::invalid_argument("word count exceeds frame");
  }

  int padded_length() const { return static_cast<int>(ids.size()); }

  std::vector<int> words() const {
    return std::vector<int>(ids.begin(), ids.begin() + length);
  }

  friend bool operator==(const Sentence& a, const Sentence& b) {
    return a.length == b.length && a.words() == b.words();
  }
};

// Lowercases, strips everything but letters/digits/apostrophes, splits on
// whitespace.
inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : line) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus,
                                   int max_size) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (max_size < 4) throw std::invalid_argument("max_size too small");

  std::map<std::string, uint64_t> counts;
  for (const auto& sentence : corpus)
    for (const auto& token : sentence) ++counts[token];
  if (counts.empty()) throw std::invalid_argument("empty corpus");

  // Sort by count desc, then token asc (deterministic tie-break).
  std::vector<std::pair<std::string, uint64_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  int budget = max_size - Vocabulary::kReserved;
  for (const auto& [token, count] : order) {
    if (budget == 0) break;
    vocab.add_token(token);
    --budget;
  }
  return vocab;
}

inline Sentence encode_sentence(const std::vector<std::string>& tokens,
                                const Vocabulary& vocab, int frame_length) {
  int count = static_cast<int>(tokens.size());
  if (count < 4 || count > frame_length)
    throw std::invalid_argument("length out of range");
  std::vector<int> ids(frame_length, Vocabulary::kPad);
  for (int i = 0; i < count; ++i) ids[i] = vocab.id_of(tokens[i]);
  return Sentence(std::move(ids), count);
}

inline std::vector<std::string> decode_sentence(const Sentence& s, const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  tokens.reserve(s.length);
  for (int id : s.words()) tokens.push_back(vocab.token_of(id));
  return tokens;
}

// Big-endian 2-byte integers, padding words excluded.
inline std::vector<uint8_t> sentence_to_symbols(const Sentence& s) {
  std::vector<uint8_t> bytes;
  bytes.reserve(2 * s.length);
  for (int id : s.words()) {
    if (id < 0 || id >= (1 << 16)) throw std::invalid_argument("word id exceeds 2 bytes");
    bytes.push_back(static_cast<uint8_t>(id >> 8));
    bytes.push_back(static_cast<uint8_t>(id & 0xFF));
  }
  return bytes;
}

// Inverse of sentence_to_symbols. Ids at or above the vocabulary size clamp
// to UNK so downstream embedding lookups stay in range.
inline Sentence symbols_to_sentence(const std::vector<uint8_t>& bytes, int frame_length,
                                    int vocab_size) {
  if (bytes.size() % 2 != 0) throw std::invalid_argument("odd symbol count");
  int count = static_cast<int>(bytes.size() / 2);
  if (count > frame_length) throw std::invalid_argument("too many words for frame");
  std::vector<int> ids(frame_length, Vocabulary::kPad);
  for (int i = 0; i < count; ++i) {
    int id = (static_cast<int>(bytes[2 * i]) << 8) | bytes[2 * i + 1];
    ids[i] = id < vocab_size ? id : Vocabulary::kUnk;
  }
  return Sentence(std::move(ids), count);
}

inline std::vector<std::vector<std::string>> load_corpus_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = tokenize(line);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  if (out.empty()) throw std::invalid_argument("empty corpus");
  return out;
}

inline std::vector<Sentence> encode_corpus(const std::vector<std::vector<std::string>>& lines,
                                           const Vocabulary& vocab, int frame_length) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& tokens : lines) out.push_back(encode_sentence(tokens, vocab, frame_length));
  return out;
}

// One token per line, in id order.
inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (int id = 0; id < vocab.size(); ++id) out << vocab.token_of(id) << '\n';
}

inline Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  int id = 0;
  while (std::getline(in, line)) {
    if (id >= Vocabulary::kReserved) vocab.add_token(line);
    ++id;
  }
  return vocab;
}

}  // namespace semharq
