#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/channel.hpp"
#include "semharq/sc_codec.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// R-stage incremental codec. Stage i has an independent encoder trunk plus a
// bit head emitting n_i - n_{i-1} bits, and a decoder consuming all n_i bits
// received so far. Parameter groups, per stage (1-based):
//   s{i}.alpha_en.*  encoder trunk
//   s{i}.theta_en.*  flat-to-bits dense head
//   s{i}.theta_de.*  bits-to-flat dense
//   s{i}.alpha_de.*  decoder trunk
// ---------------------------------------------------------------------------

struct ScharqModel {
  ModelDims dims;
  std::vector<int> cumulative_lengths;  // n_1 < ... < n_R
  ParameterStore store;
  Tensor pe;

  int stages() const { return static_cast<int>(cumulative_lengths.size()); }

  int stage_bits(int stage) const {  // bits emitted by stage (1-based)
    check_stage(stage);
    return cumulative_lengths[stage - 1] - (stage > 1 ? cumulative_lengths[stage - 2] : 0);
  }

  void check_stage(int stage) const {
    if (stage < 1 || stage > stages()) throw std::invalid_argument("stage out of range");
  }
};

inline std::string stage_prefix(int stage) { return "s" + std::to_string(stage); }

inline ScharqModel make_scharq_model(const ModelDims& dims,
                                     const std::vector<int>& cumulative_lengths,
                                     uint64_t seed) {
  for (size_t i = 1; i < cumulative_lengths.size(); ++i)
    if (cumulative_lengths[i] <= cumulative_lengths[i - 1])
      throw std::invalid_argument("cumulative lengths must increase");
  ScharqModel model;
  model.dims = dims;
  model.cumulative_lengths = cumulative_lengths;
  model.pe = positional_encoding(dims.frame_length, dims.width);
  std::mt19937_64 rng(seed);
  for (int i = 1; i <= model.stages(); ++i) {
    const std::string p = stage_prefix(i);
    init_encoder_trunk(model.store, p + ".alpha_en", dims, rng);
    init_dense(model.store, p + ".theta_en.head", dims.flat(), model.stage_bits(i), rng);
    init_dense(model.store, p + ".theta_de.head", model.cumulative_lengths[i - 1], dims.flat(),
               rng);
    init_decoder_trunk(model.store, p + ".alpha_de", dims, rng);
  }
  return model;
}

// Copies the trained SC trunks into every stage as initialization.
inline void init_stages_from_sc(ScharqModel& model, const ScModel& sc) {
  for (int i = 1; i <= model.stages(); ++i) {
    const std::string p = stage_prefix(i);
    for (const auto& [name, tensor] : sc.store.all()) {
      if (name.rfind("alpha_en.", 0) == 0)
        model.store.at(p + "." + name) = tensor;
      else if (name.rfind("alpha_de.", 0) == 0)
        model.store.at(p + "." + name) = tensor;
    }
  }
}

// ---- graph builders ----

inline Tape::NodeId scharq_encode_node(Tape& tape, ScharqModel& model, const Sentence& s,
                                       int stage) {
  model.check_stage(stage);
  const std::string p = stage_prefix(stage);
  auto trunk = encoder_trunk(tape, model.store, p + ".alpha_en", model.dims, model.pe, s.ids,
                             s.length);
  auto flat = tape.reshape(trunk, {1, static_cast<size_t>(model.dims.flat())});
  auto logits = dense(tape, flat, model.store, p + ".theta_en.head", Activation::None);
  return tape.quantize_ste(logits);  // 1 x (n_i - n_{i-1})
}

inline Tape::NodeId scharq_decode_node(Tape& tape, ScharqModel& model, Tape::NodeId all_bits,
                                       int stage, int valid_rows) {
  model.check_stage(stage);
  const std::string p = stage_prefix(stage);
  auto flat = dense(tape, all_bits, model.store, p + ".theta_de.head", Activation::Relu);
  auto grid = tape.reshape(flat, {static_cast<size_t>(model.dims.frame_length),
                                  static_cast<size_t>(model.dims.compressed())});
  return decoder_trunk(tape, model.store, p + ".alpha_de", model.dims, grid, valid_rows);
}

// ---- inference ----

inline BitString scharq_encode_stage(ScharqModel& model, const Sentence& s, int stage) {
  Tape tape;
  auto bits = scharq_encode_node(tape, model, s, stage);
  const Tensor& q = tape.val(bits);
  BitString out;
  for (size_t i = 0; i < q.size(); ++i) out.push_back(q.v[i] >= 0.5 ? 1 : 0);
  return out;
}

// Raw argmax rows from the cumulative bits b1..bi.
inline std::vector<int> scharq_infer_rows(ScharqModel& model, const BitString& received,
                                          int stage, int valid_rows) {
  model.check_stage(stage);
  if (static_cast<int>(received.size()) != model.cumulative_lengths[stage - 1])
    throw std::invalid_argument("stage length mismatch");
  Tensor bits = Tensor::zeros({1, received.size()});
  for (size_t i = 0; i < received.size(); ++i) bits.v[i] = received[i];
  Tape tape;
  auto probs = scharq_decode_node(tape, model, tape.constant(bits), stage, valid_rows);
  return argmax_rows(tape.val(probs));
}

inline Sentence scharq_decode_cumulative(ScharqModel& model, const BitString& received,
                                         int stage, int cap_len) {
  auto rows = scharq_infer_rows(model, received, stage, cap_len);
  int len = 0;
  while (len < cap_len && rows[len] != Vocabulary::kEos && rows[len] != Vocabulary::kPad) ++len;
  std::vector<int> ids(model.dims.frame_length, Vocabulary::kPad);
  for (int i = 0; i < len; ++i) ids[i] = rows[i];
  return Sentence(std::move(ids), len);
}

// ---------------------------------------------------------------------------
// Stage training: earlier-stage parameters are frozen (they are not even part
// of the stage graph); every transmitted bit, including the frozen stages'
// output, passes a bit-error training channel.
// ---------------------------------------------------------------------------

inline std::vector<EpochLog> train_scharq_stage(ScharqModel& model, int stage,
                                                const std::vector<Sentence>& corpus,
                                                const TrainHyper& hyper,
                                                double train_ber = 0.05) {
  model.check_stage(stage);
  const std::string p = stage_prefix(stage);
  const int n_prev = stage > 1 ? model.cumulative_lengths[stage - 2] : 0;

  // Frozen earlier-stage bits are fixed per sentence; compute them once.
  std::vector<BitString> prior_bits(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    BitString all;
    for (int j = 1; j < stage; ++j) all.append(scharq_encode_stage(model, corpus[i], j));
    prior_bits[i] = std::move(all);
  }

  AdamState adam;
  AdamHyper ah;
  ah.lr = hyper.lr;
  std::vector<std::string> trainable{p + ".alpha_en.", p + ".theta_en.", p + ".theta_de.",
                                     p + ".alpha_de."};
  std::vector<EpochLog> log;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    ah.lr = hyper.lr_at(epoch);
    uint64_t noise_key = channel_key(hyper.seed, 0xC0DE + epoch, stage);
    double loss = detail::run_epoch(
        model.store, corpus, trainable, adam, ah, hyper.batch,
        splitmix64(hyper.seed ^ (0x54ULL + epoch * 31 + stage)),
        [&](Tape& tape, const Sentence& s, size_t example) {
          // Locate the precomputed prior bits for this sentence.
          const BitString& prior = prior_bits[&s - corpus.data()];
          const int n_new = model.stage_bits(stage);
          std::vector<uint8_t> flips(n_prev + n_new, 0);
          for (int b = 0; b < n_prev + n_new; ++b)
            flips[b] =
                keyed_u01(noise_key, example * 4096 + b) < train_ber ? 1 : 0;

          auto current = scharq_encode_node(tape, model, s, stage);
          auto flipped_current = tape.bit_flip(
              current, std::vector<uint8_t>(flips.begin() + n_prev, flips.end()));
          Tape::NodeId all_bits;
          if (n_prev == 0) {
            all_bits = flipped_current;
          } else {
            Tensor prev = Tensor::zeros({1, static_cast<size_t>(n_prev)});
            for (int b = 0; b < n_prev; ++b)
              prev.v[b] = flips[b] ? 1.0 - prior[b] : prior[b];
            all_bits = tape.concat_cols({tape.constant(prev), flipped_current});
          }
          auto probs = scharq_decode_node(tape, model, all_bits, stage, s.length);
          return tape.cross_entropy_rows(probs, s.ids, s.length);
        });
    log.push_back({epoch, loss});
  }
  return log;
}

// P(decoded sentence == source, all words) per stage at a given bit error
// rate; trials cycle through the corpus with keyed per-round noise.
inline std::vector<double> scharq_stage_exact_rates(ScharqModel& model,
                                                    const std::vector<Sentence>& corpus,
                                                    double ber, uint64_t seed, int trials) {
  std::vector<double> hits(model.stages(), 0.0);
  ChannelSpec spec{ChannelSpec::Kind::BitError, ber, seed};
  for (int t = 0; t < trials; ++t) {
    const Sentence& s = corpus[t % corpus.size()];
    BitString received;
    for (int stage = 1; stage <= model.stages(); ++stage) {
      auto sent = scharq_encode_stage(model, s, stage);
      received.append(transmit(sent, spec, t, stage).bits);
      auto est = scharq_decode_cumulative(model, received, stage, s.length);
      if (est == s) hits[stage - 1] += 1.0;
    }
  }
  for (double& h : hits) h /= trials;
  return hits;
}

}  // namespace semharq
