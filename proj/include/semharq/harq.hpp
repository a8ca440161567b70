#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/channel.hpp"
#include "semharq/classic_codec.hpp"
#include "semharq/rs.hpp"
#include "semharq/sc_codec.hpp"
#include "semharq/scharq_codec.hpp"
#include "semharq/sim_detect.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// Session state machines for the five transmission schemes. Every round sends
// [payload][5-bit length header][detector bits] through the bit-error channel
// keyed by (seed, trial, round); the ACK/NACK feedback channel is error-free
// and free of cost.
// ---------------------------------------------------------------------------

enum class SchemeKind { HuffmanRs, SeriesScRs, ParallelScRs, Scharq, ScharqRs };

inline const char* scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::HuffmanRs: return "huffman_rs";
    case SchemeKind::SeriesScRs: return "series_sc_rs";
    case SchemeKind::ParallelScRs: return "parallel_sc_rs";
    case SchemeKind::Scharq: return "scharq";
    case SchemeKind::ScharqRs: return "scharq_rs";
  }
  return "?";
}

inline std::optional<SchemeKind> scheme_from_name(const std::string& name) {
  for (SchemeKind k : {SchemeKind::HuffmanRs, SchemeKind::SeriesScRs, SchemeKind::ParallelScRs,
                       SchemeKind::Scharq, SchemeKind::ScharqRs})
    if (name == scheme_name(k)) return k;
  return std::nullopt;
}

inline std::optional<DetectorKind> detector_from_name(const std::string& name) {
  for (DetectorKind k : {DetectorKind::Crc, DetectorKind::Sim32, DetectorKind::CrcSim32})
    if (name == detector_name(k)) return k;
  return std::nullopt;
}

inline constexpr int kLengthHeaderBits = 5;

struct RoundRecord {
  int round = 0;
  size_t payload_bits = 0;
  size_t overhead_bits = 0;  // length header + detector bits
  bool accepted = false;
};

struct TransmissionTranscript {
  SchemeKind scheme;
  DetectorKind detector;
  double ber = 0.0;
  uint64_t seed = 0;
  uint64_t trial = 0;
  std::vector<RoundRecord> rounds;
  bool delivered = false;
  Sentence estimate;  // final estimate (last round's, or the accepted one)
  size_t total_bits = 0;
};

// Frozen models and codebooks shared across concurrent sessions.
struct HarqAssets {
  int frame_length = 12;
  const HuffmanCodebook* book = nullptr;
  ScModel* sc = nullptr;
  ScharqModel* scharq = nullptr;
  Sim32Model* sim = nullptr;
};

namespace protocol_detail {

// Cumulative punctured lengths per round (symbols), rate k/n per stage.
inline const std::vector<int>& huffman_rs_lengths() {
  static const std::vector<int> lengths{7, 11, 15, 19};  // rates 5/7, 5/11, 5/15, 5/19
  return lengths;
}
inline const std::vector<int>& sc_rs_lengths() {
  static const std::vector<int> lengths{7, 11, 15};  // three rounds at most
  return lengths;
}
inline constexpr int kRsMessageSymbols = 5;
inline constexpr int kScharqRsCodeLength = 7;  // rate 5/7 parity each round

inline const RsCodeSpec& rs_spec(int n) {
  static const RsCodeSpec rs7 = make_rs(gf256(), 7, kRsMessageSymbols);
  static const RsCodeSpec rs15 = make_rs(gf256(), 15, kRsMessageSymbols);
  static const RsCodeSpec rs19 = make_rs(gf256(), 19, kRsMessageSymbols);
  switch (n) {
    case 7: return rs7;
    case 15: return rs15;
    case 19: return rs19;
  }
  throw std::invalid_argument("no spec for code length");
}

inline BitString length_header(int length) {
  BitString out;
  for (int i = kLengthHeaderBits - 1; i >= 0; --i) out.push_back((length >> i) & 1U);
  return out;
}

inline int parse_length_header(const BitString& bits, size_t offset) {
  int value = 0;
  for (int i = 0; i < kLengthHeaderBits; ++i)
    value = (value << 1) | bits[offset + i];
  return value;
}

inline BitString symbols_to_bits(const std::vector<int>& symbols) {
  std::vector<uint8_t> bytes(symbols.begin(), symbols.end());
  return BitString::from_bytes_msb(bytes);
}

inline std::vector<int> bits_to_symbols(const BitString& bits, size_t offset, size_t count) {
  std::vector<int> symbols(count, 0);
  for (size_t s = 0; s < count; ++s) {
    int value = 0;
    for (int b = 0; b < 8; ++b) value = (value << 1) | bits[offset + s * 8 + b];
    symbols[s] = value;
  }
  return symbols;
}

// Sentence-byte blocks for the parallel schemes: byte j of the 2*L_s-byte
// stream goes to block j % nblocks, slot j / nblocks, so neighbouring word
// errors land in different blocks.
inline std::vector<std::vector<int>> interleaved_symbol_blocks(const std::vector<uint8_t>& bytes,
                                                               int k) {
  size_t nblocks = (bytes.size() + k - 1) / k;
  if (nblocks == 0) nblocks = 1;
  std::vector<std::vector<int>> blocks(nblocks, std::vector<int>(k, 0));
  for (size_t j = 0; j < bytes.size(); ++j) blocks[j % nblocks][j / nblocks] = bytes[j];
  return blocks;
}

inline std::vector<uint8_t> deinterleave_symbol_blocks(
    const std::vector<std::vector<int>>& blocks, size_t byte_count) {
  std::vector<uint8_t> bytes(byte_count, 0);
  size_t nblocks = blocks.size();
  for (size_t j = 0; j < byte_count; ++j)
    bytes[j] = static_cast<uint8_t>(blocks[j % nblocks][j / nblocks]);
  return bytes;
}

inline size_t symbol_block_count(int sentence_length, int k) {
  size_t bytes = static_cast<size_t>(2) * sentence_length;
  size_t n = (bytes + k - 1) / k;
  return n == 0 ? 1 : n;
}

struct RoundIo {
  BitString payload_rx;
  int header_length = -1;  // -1 when invalid
  BitString detector_rx;
  size_t frame_bits = 0;
};

// Sends payload + header + detector bits through one channel use and splits
// the received frame.
inline RoundIo send_round(const BitString& payload, int true_length,
                          const BitString& detector_bits, const ChannelSpec& channel,
                          uint64_t trial, int round, int frame_length) {
  BitString frame = payload + length_header(true_length) + detector_bits;
  BitString rx = transmit(frame, channel, trial, static_cast<uint64_t>(round)).bits;
  RoundIo io;
  io.frame_bits = frame.size();
  io.payload_rx = rx.slice(0, payload.size());
  int header = parse_length_header(rx, payload.size());
  io.header_length = (header >= 4 && header <= frame_length) ? header : -1;
  io.detector_rx = rx.slice(payload.size() + kLengthHeaderBits, rx.size());
  return io;
}

// Decodes every RS block at the current cumulative length; positions beyond
// it are punctured-away erasures. Falls back to the raw systematic symbols
// when any block fails.
inline std::pair<std::vector<std::vector<int>>, bool> decode_blocks(
    const std::vector<std::vector<int>>& received_symbols, const RsCodeSpec& spec,
    int cumulative) {
  std::vector<std::vector<int>> messages;
  bool all_ok = true;
  for (const auto& symbols : received_symbols) {
    RsReceived r;
    r.symbols = std::vector<int>(symbols.begin(), symbols.begin() + cumulative);
    auto decoded = rs_decode(r, spec);
    if (decoded) {
      messages.push_back(*decoded);
    } else {
      all_ok = false;
      messages.push_back(
          std::vector<int>(symbols.begin(), symbols.begin() + spec.k));
    }
  }
  return {std::move(messages), all_ok};
}

}  // namespace protocol_detail

// ---------------------------------------------------------------------------
// Scheme runners.
// ---------------------------------------------------------------------------

inline TransmissionTranscript run_huffman_rs_harq(const Sentence& s, const HarqAssets& assets,
                                                  DetectorKind detector,
                                                  const ChannelSpec& channel, uint64_t trial) {
  namespace pd = protocol_detail;
  if (!assets.book) throw std::invalid_argument("huffman codebook required");
  const auto& lengths = pd::huffman_rs_lengths();
  const RsCodeSpec& spec = pd::rs_spec(lengths.back());

  BitString source_bits = huffman_encode(s, *assets.book);
  auto blocks = block_map(source_bits, spec);
  std::vector<Codeword> codewords;
  for (const auto& m : blocks) codewords.push_back(rs_encode(m, spec));
  BitString detector_bits = detector_bits_for(s, detector, assets.sim);

  TransmissionTranscript t;
  t.scheme = SchemeKind::HuffmanRs;
  t.detector = detector;
  t.ber = channel.p;
  t.seed = channel.seed;
  t.trial = trial;
  t.estimate = Sentence(std::vector<int>(assets.frame_length, Vocabulary::kPad), 0);

  // Accumulated received symbols per block.
  std::vector<std::vector<int>> received(blocks.size(), std::vector<int>(spec.n, 0));
  for (int round = 1; round <= static_cast<int>(lengths.size()); ++round) {
    int from = round == 1 ? 0 : lengths[round - 2];
    int upto = lengths[round - 1];
    std::vector<int> increment;
    for (const auto& cw : codewords)
      for (int i = from; i < upto; ++i) increment.push_back(cw.symbols[i]);
    BitString payload = pd::symbols_to_bits(increment);
    auto io = pd::send_round(payload, s.length, detector_bits, channel, trial, round,
                             assets.frame_length);
    size_t offset = 0;
    for (size_t b = 0; b < blocks.size(); ++b)
      for (int i = from; i < upto; ++i) {
        received[b][i] = pd::bits_to_symbols(io.payload_rx, offset, 1)[0];
        offset += 8;
      }

    auto [messages, all_ok] = pd::decode_blocks(received, spec, upto);
    std::optional<Sentence> estimate;
    if (auto bits = block_unmap(messages, spec))
      if (auto decoded = huffman_decode(*bits, *assets.book, assets.frame_length))
        estimate = std::move(*decoded);

    bool accepted =
        estimate.has_value() && detector_decide(detector, *estimate, io.detector_rx, assets.sim);
    t.rounds.push_back({round, payload.size(), io.frame_bits - payload.size(), accepted});
    t.total_bits += io.frame_bits;
    if (estimate) t.estimate = *estimate;
    if (accepted) {
      t.delivered = true;
      break;
    }
  }
  return t;
}

inline TransmissionTranscript run_series_sc_rs_harq(const Sentence& s, const HarqAssets& assets,
                                                    DetectorKind detector,
                                                    const ChannelSpec& channel, uint64_t trial) {
  namespace pd = protocol_detail;
  if (!assets.sc) throw std::invalid_argument("sc checkpoint required");
  const auto& lengths = pd::sc_rs_lengths();
  const RsCodeSpec& spec = pd::rs_spec(lengths.back());
  const int B = assets.sc->dims.bits_per_word;

  BitString sc_bits = sc_encode_bits(*assets.sc, s);
  auto blocks = block_map(sc_bits, spec);
  std::vector<Codeword> codewords;
  for (const auto& m : blocks) codewords.push_back(rs_encode(m, spec));
  BitString detector_bits = detector_bits_for(s, detector, assets.sim);

  TransmissionTranscript t;
  t.scheme = SchemeKind::SeriesScRs;
  t.detector = detector;
  t.ber = channel.p;
  t.seed = channel.seed;
  t.trial = trial;
  t.estimate = Sentence(std::vector<int>(assets.frame_length, Vocabulary::kPad), 0);

  std::vector<std::vector<int>> received(blocks.size(), std::vector<int>(spec.n, 0));
  for (int round = 1; round <= static_cast<int>(lengths.size()); ++round) {
    int from = round == 1 ? 0 : lengths[round - 2];
    int upto = lengths[round - 1];
    std::vector<int> increment;
    for (const auto& cw : codewords)
      for (int i = from; i < upto; ++i) increment.push_back(cw.symbols[i]);
    BitString payload = pd::symbols_to_bits(increment);
    auto io = pd::send_round(payload, s.length, detector_bits, channel, trial, round,
                             assets.frame_length);
    size_t offset = 0;
    for (size_t b = 0; b < blocks.size(); ++b)
      for (int i = from; i < upto; ++i) {
        received[b][i] = pd::bits_to_symbols(io.payload_rx, offset, 1)[0];
        offset += 8;
      }

    auto [messages, all_ok] = pd::decode_blocks(received, spec, upto);
    std::optional<Sentence> estimate;
    if (io.header_length > 0) {
      if (auto bits = block_unmap(messages, spec)) {
        // Header and recovered frame must agree on the sentence length.
        if (bits->size() == static_cast<size_t>(io.header_length) * B)
          estimate = sc_decode_bits(*assets.sc, *bits);
      }
    }

    bool accepted =
        estimate.has_value() && detector_decide(detector, *estimate, io.detector_rx, assets.sim);
    t.rounds.push_back({round, payload.size(), io.frame_bits - payload.size(), accepted});
    t.total_bits += io.frame_bits;
    if (estimate) t.estimate = *estimate;
    if (accepted) {
      t.delivered = true;
      break;
    }
  }
  return t;
}

inline TransmissionTranscript run_parallel_sc_rs_harq(const Sentence& s, const HarqAssets& assets,
                                                      DetectorKind detector,
                                                      const ChannelSpec& channel,
                                                      uint64_t trial) {
  namespace pd = protocol_detail;
  if (!assets.sc) throw std::invalid_argument("sc checkpoint required");
  const auto& lengths = pd::sc_rs_lengths();
  const RsCodeSpec& spec = pd::rs_spec(lengths.back());
  const int B = assets.sc->dims.bits_per_word;
  const int k = spec.k;

  BitString sc_bits = sc_encode_bits(*assets.sc, s);
  auto symbol_blocks = pd::interleaved_symbol_blocks(sentence_to_symbols(s), k);
  std::vector<Codeword> codewords;
  for (const auto& m : symbol_blocks) codewords.push_back(rs_encode(m, spec));
  BitString detector_bits = detector_bits_for(s, detector, assets.sim);

  TransmissionTranscript t;
  t.scheme = SchemeKind::ParallelScRs;
  t.detector = detector;
  t.ber = channel.p;
  t.seed = channel.seed;
  t.trial = trial;
  t.estimate = Sentence(std::vector<int>(assets.frame_length, Vocabulary::kPad), 0);

  BitString sc_rx;  // round-1 systematic payload, kept for later rounds
  std::vector<std::vector<int>> parity_rx(codewords.size(),
                                          std::vector<int>(spec.n - k, 0));
  for (int round = 1; round <= static_cast<int>(lengths.size()); ++round) {
    int from = round == 1 ? k : lengths[round - 2];
    int upto = lengths[round - 1];
    std::vector<int> increment;
    for (const auto& cw : codewords)
      for (int i = from; i < upto; ++i) increment.push_back(cw.symbols[i]);
    BitString payload = pd::symbols_to_bits(increment);
    if (round == 1) payload = sc_bits + payload;
    auto io = pd::send_round(payload, s.length, detector_bits, channel, trial, round,
                             assets.frame_length);

    size_t offset = round == 1 ? sc_bits.size() : 0;
    if (round == 1) sc_rx = io.payload_rx.slice(0, sc_bits.size());
    for (size_t b = 0; b < codewords.size(); ++b)
      for (int i = from; i < upto; ++i) {
        parity_rx[b][i - k] = pd::bits_to_symbols(io.payload_rx, offset, 1)[0];
        offset += 8;
      }

    std::optional<Sentence> estimate;
    if (io.header_length > 0 &&
        sc_rx.size() == static_cast<size_t>(io.header_length) * B &&
        pd::symbol_block_count(io.header_length, k) == codewords.size()) {
      const int L_s = io.header_length;
      // Receiver-side systematic part: raw decoder rows mapped to symbols.
      std::vector<int> rows = sc_infer_rows(*assets.sc, sc_rx);
      std::vector<uint8_t> est_bytes;
      for (int i = 0; i < L_s; ++i) {
        est_bytes.push_back(static_cast<uint8_t>(rows[i] >> 8));
        est_bytes.push_back(static_cast<uint8_t>(rows[i] & 0xFF));
      }
      auto est_blocks = pd::interleaved_symbol_blocks(est_bytes, k);
      std::vector<std::vector<int>> full(est_blocks.size());
      for (size_t b = 0; b < est_blocks.size(); ++b) {
        full[b] = est_blocks[b];
        for (int i = k; i < upto; ++i) full[b].push_back(parity_rx[b][i - k]);
      }
      auto [messages, all_ok] = pd::decode_blocks(full, spec, upto);
      if (all_ok) {
        auto bytes = pd::deinterleave_symbol_blocks(messages, 2 * L_s);
        estimate = symbols_to_sentence(bytes, assets.frame_length, assets.sc->dims.vocab);
      } else {
        // RS could not correct; keep the semantic decoder's own estimate.
        estimate = sc_decode_bits(*assets.sc, sc_rx);
      }
    }

    bool accepted =
        estimate.has_value() && detector_decide(detector, *estimate, io.detector_rx, assets.sim);
    t.rounds.push_back({round, payload.size(), io.frame_bits - payload.size(), accepted});
    t.total_bits += io.frame_bits;
    if (estimate) t.estimate = *estimate;
    if (accepted) {
      t.delivered = true;
      break;
    }
  }
  return t;
}

inline TransmissionTranscript run_scharq(const Sentence& s, const HarqAssets& assets,
                                         DetectorKind detector, const ChannelSpec& channel,
                                         uint64_t trial, bool with_rs = false) {
  namespace pd = protocol_detail;
  if (!assets.scharq) throw std::invalid_argument("scharq checkpoint required");
  ScharqModel& model = *assets.scharq;
  const RsCodeSpec& spec = pd::rs_spec(pd::kScharqRsCodeLength);
  const int k = spec.k;

  BitString detector_bits = detector_bits_for(s, detector, assets.sim);
  std::vector<std::vector<int>> symbol_blocks;
  std::vector<Codeword> codewords;
  if (with_rs) {
    symbol_blocks = pd::interleaved_symbol_blocks(sentence_to_symbols(s), k);
    for (const auto& m : symbol_blocks) codewords.push_back(rs_encode(m, spec));
  }

  TransmissionTranscript t;
  t.scheme = with_rs ? SchemeKind::ScharqRs : SchemeKind::Scharq;
  t.detector = detector;
  t.ber = channel.p;
  t.seed = channel.seed;
  t.trial = trial;
  t.estimate = Sentence(std::vector<int>(assets.frame_length, Vocabulary::kPad), 0);

  BitString received;
  for (int round = 1; round <= model.stages(); ++round) {
    BitString stage = scharq_encode_stage(model, s, round);
    BitString payload = stage;
    if (with_rs) {
      std::vector<int> parity;
      for (const auto& cw : codewords)
        for (int i = k; i < spec.n; ++i) parity.push_back(cw.symbols[i]);
      payload = stage + pd::symbols_to_bits(parity);
    }
    auto io = pd::send_round(payload, s.length, detector_bits, channel, trial, round,
                             assets.frame_length);
    received.append(io.payload_rx.slice(0, stage.size()));

    std::optional<Sentence> estimate;
    if (io.header_length > 0) {
      const int L_s = io.header_length;
      if (!with_rs) {
        estimate = scharq_decode_cumulative(model, received, round, L_s);
      } else if (pd::symbol_block_count(L_s, k) == codewords.size()) {
        auto rows = scharq_infer_rows(model, received, round, L_s);
        std::vector<uint8_t> est_bytes;
        for (int i = 0; i < L_s; ++i) {
          est_bytes.push_back(static_cast<uint8_t>(rows[i] >> 8));
          est_bytes.push_back(static_cast<uint8_t>(rows[i] & 0xFF));
        }
        auto est_blocks = pd::interleaved_symbol_blocks(est_bytes, k);
        std::vector<std::vector<int>> full(est_blocks.size());
        size_t offset = stage.size();
        for (size_t b = 0; b < est_blocks.size(); ++b) {
          full[b] = est_blocks[b];
          auto parity = pd::bits_to_symbols(io.payload_rx, offset, spec.n - k);
          offset += static_cast<size_t>(spec.n - k) * 8;
          for (int p : parity) full[b].push_back(p);
        }
        auto [messages, all_ok] = pd::decode_blocks(full, spec, spec.n);
        if (all_ok) {
          auto bytes = pd::deinterleave_symbol_blocks(messages, 2 * static_cast<size_t>(L_s));
          estimate = symbols_to_sentence(bytes, assets.frame_length, model.dims.vocab);
        } else {
          estimate = scharq_decode_cumulative(model, received, round, L_s);
        }
      }
    }

    bool accepted =
        estimate.has_value() && detector_decide(detector, *estimate, io.detector_rx, assets.sim);
    t.rounds.push_back({round, payload.size(), io.frame_bits - payload.size(), accepted});
    t.total_bits += io.frame_bits;
    if (estimate) t.estimate = *estimate;
    if (accepted) {
      t.delivered = true;
      break;
    }
  }
  return t;
}

inline TransmissionTranscript run_session(SchemeKind kind, const Sentence& s,
                                          const HarqAssets& assets, DetectorKind detector,
                                          const ChannelSpec& channel, uint64_t trial) {
  switch (kind) {
    case SchemeKind::HuffmanRs:
      return run_huffman_rs_harq(s, assets, detector, channel, trial);
    case SchemeKind::SeriesScRs:
      return run_series_sc_rs_harq(s, assets, detector, channel, trial);
    case SchemeKind::ParallelScRs:
      return run_parallel_sc_rs_harq(s, assets, detector, channel, trial);
    case SchemeKind::Scharq:
      return run_scharq(s, assets, detector, channel, trial, false);
    case SchemeKind::ScharqRs:
      return run_scharq(s, assets, detector, channel, trial, true);
  }
  throw std::logic_error("unreachable");
}

}  // namespace semharq
