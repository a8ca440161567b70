#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/channel.hpp"
#include "semharq/classic_codec.hpp"
#include "semharq/scharq_codec.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// BLEU: geometric mean of modified n-gram precisions with brevity penalty.
// Short sentences truncate the order to the longest n-gram both sides have.
// ---------------------------------------------------------------------------

inline double bleu_score(const Sentence& reference, const Sentence& candidate) {
  const auto ref = reference.words();
  const auto cand = candidate.words();
  if (cand.empty()) return 0.0;
  if (ref.empty()) return 0.0;

  int max_n = std::min({4, static_cast<int>(ref.size()), static_cast<int>(cand.size())});
  double log_precision = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    std::map<std::vector<int>, int> ref_counts, cand_counts;
    for (size_t i = 0; i + n <= ref.size(); ++i)
      ++ref_counts[std::vector<int>(ref.begin() + i, ref.begin() + i + n)];
    for (size_t i = 0; i + n <= cand.size(); ++i)
      ++cand_counts[std::vector<int>(cand.begin() + i, cand.begin() + i + n)];
    long matched = 0, total = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    if (matched == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  log_precision /= max_n;

  double brevity = 1.0;
  if (cand.size() < ref.size())
    brevity = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
  return brevity * std::exp(log_precision);
}

// ---------------------------------------------------------------------------
// Similarity oracle: cosine of mean-pooled trained word embeddings. Identical
// word sequences score exactly 1; a zero pooled vector scores 0.
// ---------------------------------------------------------------------------

inline double similarity_oracle(const Sentence& a, const Sentence& b, const Tensor& embeddings) {
  if (a.length > 0 && a.words() == b.words()) return 1.0;
  auto pool = [&](const Sentence& s) {
    std::vector<double> mean(embeddings.cols(), 0.0);
    for (int id : s.words())
      for (size_t c = 0; c < embeddings.cols(); ++c)
        mean[c] += embeddings.at(static_cast<size_t>(id), c);
    if (s.length > 0)
      for (double& x : mean) x /= s.length;
    return mean;
  };
  auto va = pool(a), vb = pool(b);
  double dot = 0, na = 0, nb = 0;
  for (size_t c = 0; c < va.size(); ++c) {
    dot += va[c] * vb[c];
    na += va[c] * va[c];
    nb += vb[c] * vb[c];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline constexpr double kSimilarLabelThreshold = 0.98;

// 1 iff oracle similarity strictly exceeds the threshold.
inline int make_label(const Sentence& s, const Sentence& estimate, const Tensor& embeddings) {
  return similarity_oracle(s, estimate, embeddings) > kSimilarLabelThreshold ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Sim32: 32-bit learned fingerprint plus a two-layer classifier.
// Parameter groups:
//   alpha_sim1.*  transmit-side encoder trunk
//   theta_sim1.*  32-bit quantizer head
//   alpha_sim2.*  receive-side encoder trunk
//   w_sim.*       classifier (hidden 4x input, ReLU; sigmoid scalar output)
// ---------------------------------------------------------------------------

inline constexpr int kSimBits = 32;

struct Sim32Model {
  ModelDims dims;
  ParameterStore store;
  Tensor pe;
};

inline Sim32Model make_sim32_model(const ModelDims& dims, uint64_t seed) {
  Sim32Model model;
  model.dims = dims;
  model.pe = positional_encoding(dims.frame_length, dims.width);
  std::mt19937_64 rng(seed);
  init_encoder_trunk(model.store, "alpha_sim1", dims, rng);
  init_dense(model.store, "theta_sim1.head", dims.flat(), kSimBits, rng);
  init_encoder_trunk(model.store, "alpha_sim2", dims, rng);
  const int classifier_in = kSimBits + dims.flat();
  init_dense(model.store, "w_sim.fc1", classifier_in, 4 * classifier_in, rng);
  init_dense(model.store, "w_sim.fc2", 4 * classifier_in, 1, rng);
  return model;
}

namespace detail {
// Trunk masking wants at least one valid row even for degenerate estimates.
inline int clamp_rows(int length, int frame_length) {
  return std::max(1, std::min(length, frame_length));
}
}  // namespace detail

inline Tape::NodeId sim_encode32_node(Tape& tape, Sim32Model& model, const Sentence& s) {
  auto trunk = encoder_trunk(tape, model.store, "alpha_sim1", model.dims, model.pe, s.ids,
                             detail::clamp_rows(s.length, model.dims.frame_length));
  auto flat = tape.reshape(trunk, {1, static_cast<size_t>(model.dims.flat())});
  auto logits = dense(tape, flat, model.store, "theta_sim1.head", Activation::None);
  return tape.quantize_ste(logits);
}

inline Tape::NodeId sim32_score_node(Tape& tape, Sim32Model& model, const Sentence& estimate,
                                     Tape::NodeId fingerprint_bits) {
  auto trunk =
      encoder_trunk(tape, model.store, "alpha_sim2", model.dims, model.pe, estimate.ids,
                    detail::clamp_rows(estimate.length, model.dims.frame_length));
  auto flat = tape.reshape(trunk, {1, static_cast<size_t>(model.dims.flat())});
  auto joined = tape.concat_cols({fingerprint_bits, flat});
  auto hidden = dense(tape, joined, model.store, "w_sim.fc1", Activation::Relu);
  return dense(tape, hidden, model.store, "w_sim.fc2", Activation::Sigmoid);
}

// Exactly 32 bits regardless of sentence length.
inline BitString sim_encode32(Sim32Model& model, const Sentence& s) {
  Tape tape;
  auto bits = sim_encode32_node(tape, model, s);
  const Tensor& q = tape.val(bits);
  BitString out;
  for (size_t i = 0; i < q.size(); ++i) out.push_back(q.v[i] >= 0.5 ? 1 : 0);
  return out;
}

inline double sim32_score(Sim32Model& model, const Sentence& estimate,
                          const BitString& fingerprint) {
  if (fingerprint.size() != kSimBits) throw std::invalid_argument("missing detector bits");
  Tensor bits = Tensor::zeros({1, kSimBits});
  for (int i = 0; i < kSimBits; ++i) bits.v[i] = fingerprint[i];
  Tape tape;
  auto score = sim32_score_node(tape, model, estimate, tape.constant(bits));
  return tape.val(score).v[0];
}

// ---------------------------------------------------------------------------
// Labeled-pair dataset.
// ---------------------------------------------------------------------------

struct LabeledPair {
  Sentence source;
  Sentence estimate;
  double ber;
  int round;  // 0 = plain SC, 1..R = incremental stage
  double similarity;
  int label;
};

// Runs the trained codecs over the corpus at each error rate and collects
// (source, estimate) pairs from every retransmission stage.
inline std::vector<LabeledPair> generate_sim_dataset(ScModel& sc, ScharqModel& scharq,
                                                     const std::vector<Sentence>& corpus,
                                                     const std::vector<double>& bers,
                                                     uint64_t seed) {
  const Tensor& embeddings = sc.store.at("alpha_en.embed");
  std::vector<LabeledPair> pairs;
  for (size_t t = 0; t < corpus.size(); ++t) {
    const Sentence& s = corpus[t];
    BitString sc_bits = sc_encode_bits(sc, s);
    std::vector<BitString> stage_bits;
    for (int stage = 1; stage <= scharq.stages(); ++stage)
      stage_bits.push_back(scharq_encode_stage(scharq, s, stage));
    for (size_t bi = 0; bi < bers.size(); ++bi) {
      ChannelSpec spec{ChannelSpec::Kind::BitError, bers[bi], seed + bi};
      auto add_pair = [&](Sentence est, int round) {
        double sim = similarity_oracle(s, est, embeddings);
        pairs.push_back({s, std::move(est), bers[bi], round, sim,
                         sim > kSimilarLabelThreshold ? 1 : 0});
      };
      add_pair(sc_decode_bits(sc, transmit(sc_bits, spec, t, 0).bits), 0);
      BitString received;
      for (int stage = 1; stage <= scharq.stages(); ++stage) {
        received.append(transmit(stage_bits[stage - 1], spec, t, stage).bits);
        add_pair(scharq_decode_cumulative(scharq, received, stage, s.length), stage);
      }
    }
  }
  return pairs;
}

// Downsamples the majority class to at most `ratio`:1.
inline std::vector<LabeledPair> balance_pairs(const std::vector<LabeledPair>& pairs,
                                              int ratio = 3) {
  long pos = 0, neg = 0;
  for (const auto& p : pairs) (p.label ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw std::invalid_argument("degenerate labels");
  long keep_pos = pos, keep_neg = neg;
  if (pos > ratio * neg) keep_pos = ratio * neg;
  if (neg > ratio * pos) keep_neg = ratio * pos;
  std::vector<LabeledPair> out;
  long seen_pos = 0, seen_neg = 0, taken_pos = 0, taken_neg = 0;
  for (const auto& p : pairs) {
    if (p.label) {
      ++seen_pos;
      if (taken_pos * pos < keep_pos * seen_pos) {
        out.push_back(p);
        ++taken_pos;
      }
    } else {
      ++seen_neg;
      if (taken_neg * neg < keep_neg * seen_neg) {
        out.push_back(p);
        ++taken_neg;
      }
    }
  }
  return out;
}

// CSV columns: sentence_ids, estimate_ids, ber, round, oracle_similarity,
// label. Ids are space separated.
inline void save_pairs_csv(const std::vector<LabeledPair>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << "sentence_ids,estimate_ids,ber,round,oracle_similarity,label\n";
  auto put_ids = [&](const Sentence& s) {
    auto words = s.words();
    for (size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
  };
  for (const auto& p : pairs) {
    put_ids(p.source);
    out << ',';
    put_ids(p.estimate);
    out << ',' << p.ber << ',' << p.round << ',' << p.similarity << ',' << p.label << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sim32 training and evaluation. The fingerprint passes the same bit-error
// channel the pair was collected under.
// ---------------------------------------------------------------------------

inline std::vector<EpochLog> train_sim32(Sim32Model& model, const std::vector<LabeledPair>& pairs,
                                         const TrainHyper& hyper) {
  {
    long pos = 0;
    for (const auto& p : pairs) pos += p.label;
    if (pos == 0 || pos == static_cast<long>(pairs.size()))
      throw std::invalid_argument("degenerate labels");
  }
  AdamState adam;
  AdamHyper ah;
  ah.lr = hyper.lr;
  std::vector<EpochLog> log;
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    ah.lr = hyper.lr_at(epoch);
    std::mt19937_64 shuffle_rng(splitmix64(hyper.seed ^ (0x55AAULL + epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    uint64_t noise_key = channel_key(hyper.seed, 0x51AAULL, epoch);
    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      size_t take = std::min(static_cast<size_t>(hyper.batch), order.size() - done);
      std::map<std::string, Tensor> acc;
      for (size_t b = 0; b < take; ++b) {
        const LabeledPair& pair = pairs[order[done + b]];
        std::vector<uint8_t> flips(kSimBits, 0);
        for (int i = 0; i < kSimBits; ++i)
          flips[i] = keyed_u01(noise_key, (done + b) * 64 + i) < pair.ber ? 1 : 0;
        Tape tape;
        auto fingerprint = tape.bit_flip(sim_encode32_node(tape, model, pair.source), flips);
        auto score = sim32_score_node(tape, model, pair.estimate, fingerprint);
        auto loss = tape.binary_cross_entropy(score, pair.label);
        double value = tape.val(loss).v[0];
        if (!std::isfinite(value)) throw std::runtime_error("training diverged");
        epoch_loss += value;
        tape.backward(loss);
        for (auto& [name, g] : tape.param_grads()) {
          auto it = acc.find(name);
          if (it == acc.end())
            acc.emplace(name, std::move(g));
          else
            for (size_t i = 0; i < g.size(); ++i) it->second.v[i] += g.v[i];
        }
      }
      for (auto& [name, g] : acc)
        for (double& x : g.v) x /= static_cast<double>(take);
      adam_step(model.store, acc, adam, ah);
      done += take;
    }
    log.push_back({epoch, epoch_loss / static_cast<double>(pairs.size())});
  }
  return log;
}

struct SimEvalResult {
  double accuracy_all = 0.0;
  double accuracy_outside_band = 0.0;  // oracle similarity < 0.9 or > 0.99
  long outside_band = 0;
};

// Decision = score > 0.5 against the oracle label; fingerprints pass the
// pair's channel with an evaluation seed.
inline SimEvalResult evaluate_sim32(Sim32Model& model, const std::vector<LabeledPair>& pairs,
                                    uint64_t seed) {
  SimEvalResult result;
  long correct_all = 0, correct_band = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const LabeledPair& pair = pairs[i];
    BitString fingerprint = sim_encode32(model, pair.source);
    ChannelSpec spec{ChannelSpec::Kind::BitError, pair.ber, seed};
    fingerprint = transmit(fingerprint, spec, i, 0).bits;
    int decision = sim32_score(model, pair.estimate, fingerprint) > 0.5 ? 1 : 0;
    correct_all += decision == pair.label ? 1 : 0;
    if (pair.similarity < 0.9 || pair.similarity > 0.99) {
      ++result.outside_band;
      correct_band += decision == pair.label ? 1 : 0;
    }
  }
  result.accuracy_all = pairs.empty() ? 0.0 : static_cast<double>(correct_all) / pairs.size();
  result.accuracy_outside_band =
      result.outside_band == 0 ? 0.0
                               : static_cast<double>(correct_band) / result.outside_band;
  return result;
}

// ---------------------------------------------------------------------------
// Detector family shared by every transmission scheme. CRC bits cover the
// sentence's 2-byte symbol serialization; CRC-Sim32 tries CRC first and
// falls back to the similarity verdict, costing 32 extra bits.
// ---------------------------------------------------------------------------

enum class DetectorKind { Crc, Sim32, CrcSim32 };

inline const char* detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Crc: return "crc";
    case DetectorKind::Sim32: return "sim32";
    case DetectorKind::CrcSim32: return "crc_sim32";
  }
  return "?";
}

inline int detector_overhead_bits(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Crc: return kCrcBits;
    case DetectorKind::Sim32: return kSimBits;
    case DetectorKind::CrcSim32: return kCrcBits + kSimBits;
  }
  return 0;
}

inline BitString sentence_crc_bits(const Sentence& s) {
  return crc32_check_bits(BitString::from_bytes_msb(sentence_to_symbols(s)));
}

inline BitString detector_bits_for(const Sentence& s, DetectorKind kind, Sim32Model* sim) {
  switch (kind) {
    case DetectorKind::Crc:
      return sentence_crc_bits(s);
    case DetectorKind::Sim32:
      if (!sim) throw std::invalid_argument("similarity detector requires a model");
      return sim_encode32(*sim, s);
    case DetectorKind::CrcSim32: {
      if (!sim) throw std::invalid_argument("similarity detector requires a model");
      return sentence_crc_bits(s) + sim_encode32(*sim, s);
    }
  }
  throw std::logic_error("unreachable");
}

inline bool detector_decide(DetectorKind kind, const Sentence& estimate,
                            const BitString& received_bits, Sim32Model* sim) {
  if (static_cast<int>(received_bits.size()) != detector_overhead_bits(kind))
    throw std::invalid_argument("missing detector bits");
  switch (kind) {
    case DetectorKind::Crc:
      return sentence_crc_bits(estimate) == received_bits;
    case DetectorKind::Sim32:
      return sim32_score(*sim, estimate, received_bits) > 0.5;
    case DetectorKind::CrcSim32: {
      BitString crc = received_bits.slice(0, kCrcBits);
      if (sentence_crc_bits(estimate) == crc) return true;
      BitString fingerprint = received_bits.slice(kCrcBits, kCrcBits + kSimBits);
      return sim32_score(*sim, estimate, fingerprint) > 0.5;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace semharq
