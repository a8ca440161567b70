#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/autodiff.hpp"
#include "semharq/bitstring.hpp"
#include "semharq/channel.hpp"
#include "semharq/corpus.hpp"
#include "semharq/nn.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// Shared model geometry and the encoder/decoder trunks reused by the SC
// codec, the staged incremental codec, and the similarity detector.
// ---------------------------------------------------------------------------

struct ModelDims {
  int frame_length = 12;   // L
  int width = 32;          // M
  int bits_per_word = 16;  // B
  int blocks = 2;
  int heads = 2;
  int vocab = 128;

  int compressed() const { return width / 4; }
  int flat() const { return frame_length * compressed(); }
  TransformerConfig block_config() const {
    return {static_cast<size_t>(width), static_cast<size_t>(heads),
            static_cast<size_t>(4 * width)};
  }
};

// Embedding + transformer blocks + compression dense: L x M -> L x M/4.
inline void init_encoder_trunk(ParameterStore& store, const std::string& prefix,
                               const ModelDims& dims, std::mt19937_64& rng) {
  store.add(prefix + ".embed", uniform_init({static_cast<size_t>(dims.vocab),
                                             static_cast<size_t>(dims.width)},
                                            dims.width, rng));
  for (int b = 0; b < dims.blocks; ++b)
    init_transformer_block(store, prefix + ".blk" + std::to_string(b), dims.block_config(), rng);
  init_dense(store, prefix + ".compress", dims.width, dims.compressed(), rng);
}

inline Tape::NodeId encoder_trunk(Tape& tape, ParameterStore& store, const std::string& prefix,
                                  const ModelDims& dims, const Tensor& pe,
                                  const std::vector<int>& ids, int valid_rows) {
  auto psi = tape.param(prefix + ".embed", store.at(prefix + ".embed"));
  auto x = tape.embed_rows(ids, psi, pe);
  for (int b = 0; b < dims.blocks; ++b)
    x = transformer_block(tape, x, store, prefix + ".blk" + std::to_string(b),
                          dims.block_config(), valid_rows);
  return dense(tape, x, store, prefix + ".compress", Activation::Relu);
}

// Expansion dense + transformer blocks + vocabulary softmax:
// L x M/4 -> L x vocab row distributions.
inline void init_decoder_trunk(ParameterStore& store, const std::string& prefix,
                               const ModelDims& dims, std::mt19937_64& rng) {
  init_dense(store, prefix + ".expand", dims.compressed(), dims.width, rng);
  for (int b = 0; b < dims.blocks; ++b)
    init_transformer_block(store, prefix + ".blk" + std::to_string(b), dims.block_config(), rng);
  init_dense(store, prefix + ".out", dims.width, dims.vocab, rng);
}

inline Tape::NodeId decoder_trunk(Tape& tape, ParameterStore& store, const std::string& prefix,
                                  const ModelDims& dims, Tape::NodeId compressed,
                                  int valid_rows) {
  auto x = dense(tape, compressed, store, prefix + ".expand", Activation::Relu);
  for (int b = 0; b < dims.blocks; ++b)
    x = transformer_block(tape, x, store, prefix + ".blk" + std::to_string(b),
                          dims.block_config(), valid_rows);
  return dense(tape, x, store, prefix + ".out", Activation::Softmax);
}

// Per-row argmax (ties break to the lowest id), truncated at the first
// EOS/PAD, capped at cap_len words.
inline Sentence sentence_from_probability_rows(const Tensor& probs, int frame_length,
                                               int cap_len) {
  std::vector<int> rows(frame_length, Vocabulary::kPad);
  for (int r = 0; r < frame_length; ++r) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.cols()); ++c)
      if (probs.at(r, c) > probs.at(r, best)) best = c;
    rows[r] = best;
  }
  int len = 0;
  while (len < cap_len && rows[len] != Vocabulary::kEos && rows[len] != Vocabulary::kPad) ++len;
  std::vector<int> ids(frame_length, Vocabulary::kPad);
  for (int i = 0; i < len; ++i) ids[i] = rows[i];
  return Sentence(std::move(ids), len);
}

inline std::vector<int> argmax_rows(const Tensor& probs) {
  std::vector<int> rows(probs.rows(), 0);
  for (size_t r = 0; r < probs.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.cols()); ++c)
      if (probs.at(r, c) > probs.at(r, best)) best = c;
    rows[r] = best;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SC codec: encoder trunk, length-masked one-bit quantizer, dequantizer,
// decoder trunk. Parameter groups:
//   alpha_en.*  embedding + encoder blocks + compression dense
//   theta_en.*  quantizer dense (linear head feeding the sign quantizer)
//   theta_de.*  dequantizer dense
//   alpha_de.*  expansion dense + decoder blocks + output dense
// ---------------------------------------------------------------------------

struct ScModel {
  ModelDims dims;
  ParameterStore store;
  Tensor pe;
};

inline ScModel make_sc_model(const ModelDims& dims, uint64_t seed) {
  ScModel model;
  model.dims = dims;
  model.pe = positional_encoding(dims.frame_length, dims.width);
  std::mt19937_64 rng(seed);
  init_encoder_trunk(model.store, "alpha_en", dims, rng);
  init_dense(model.store, "theta_en.quant", dims.compressed(), dims.bits_per_word, rng);
  init_dense(model.store, "theta_de.dequant", dims.bits_per_word, dims.compressed(), rng);
  init_decoder_trunk(model.store, "alpha_de", dims, rng);
  return model;
}

// Graph builder pieces (shared by training and inference).

inline Tape::NodeId sc_encode_node(Tape& tape, ScModel& model, const Sentence& s) {
  return encoder_trunk(tape, model.store, "alpha_en", model.dims, model.pe, s.ids, s.length);
}

// Dense to L x B, one-bit quantize, zero rows at and beyond L_s. The first
// L_s rows hold the transmitted bits.
inline Tape::NodeId sc_quantize_node(Tape& tape, ScModel& model, Tape::NodeId s_en, int L_s) {
  auto logits = dense(tape, s_en, model.store, "theta_en.quant", Activation::None);
  auto bits = tape.quantize_ste(logits);
  return tape.zero_rows_from(bits, static_cast<size_t>(L_s));
}

inline Tape::NodeId sc_dequantize_node(Tape& tape, ScModel& model, Tape::NodeId padded_bits) {
  return dense(tape, padded_bits, model.store, "theta_de.dequant", Activation::Relu);
}

inline Tape::NodeId sc_decode_node(Tape& tape, ScModel& model, Tape::NodeId s_en_hat,
                                   int valid_rows) {
  return decoder_trunk(tape, model.store, "alpha_de", model.dims, s_en_hat, valid_rows);
}

// ---- inference-facing operations ----

inline Tensor sc_encode(ScModel& model, const Sentence& s) {
  Tape tape;
  return tape.val(sc_encode_node(tape, model, s));
}

// Exactly L_s * B bits; the remaining rows are not transmitted.
inline BitString quantize_mask(ScModel& model, const Tensor& s_en, int L_s) {
  if (L_s < 1 || L_s > model.dims.frame_length) throw std::invalid_argument("length out of range");
  Tape tape;
  auto bits = sc_quantize_node(tape, model, tape.constant(s_en), L_s);
  const Tensor& q = tape.val(bits);
  BitString out;
  for (int r = 0; r < L_s; ++r)
    for (int c = 0; c < model.dims.bits_per_word; ++c)
      out.push_back(q.at(r, c) >= 0.5 ? 1 : 0);
  return out;
}

// Zero-pads |bits|/B rows to the full frame and maps back to L x M/4.
inline Tensor dequantize_pad(ScModel& model, const BitString& bits) {
  const int B = model.dims.bits_per_word;
  if (bits.size() % B != 0 || bits.size() / B > static_cast<size_t>(model.dims.frame_length))
    throw std::invalid_argument("corrupt frame length");
  Tensor padded = Tensor::zeros({static_cast<size_t>(model.dims.frame_length),
                                 static_cast<size_t>(B)});
  for (size_t i = 0; i < bits.size(); ++i) padded.v[i] = bits[i];
  Tape tape;
  return tape.val(sc_dequantize_node(tape, model, tape.constant(padded)));
}

inline Sentence sc_decode(ScModel& model, const Tensor& s_en_hat, int valid_rows = 0) {
  Tape tape;
  auto probs = sc_decode_node(tape, model, tape.constant(s_en_hat), valid_rows);
  return sentence_from_probability_rows(tape.val(probs), model.dims.frame_length,
                                        model.dims.frame_length);
}

inline BitString sc_encode_bits(ScModel& model, const Sentence& s) {
  Tape tape;
  auto s_en = sc_encode_node(tape, model, s);
  auto bits = sc_quantize_node(tape, model, s_en, s.length);
  const Tensor& q = tape.val(bits);
  BitString out;
  for (int r = 0; r < s.length; ++r)
    for (int c = 0; c < model.dims.bits_per_word; ++c)
      out.push_back(q.at(r, c) >= 0.5 ? 1 : 0);
  return out;
}

// Raw per-row argmax ids for the receiver-side chain; the word count is
// inferred from the bit count.
inline std::vector<int> sc_infer_rows(ScModel& model, const BitString& bits) {
  const int B = model.dims.bits_per_word;
  if (bits.size() % B != 0 || bits.empty() ||
      bits.size() / B > static_cast<size_t>(model.dims.frame_length))
    throw std::invalid_argument("corrupt frame length");
  int L_s = static_cast<int>(bits.size()) / B;
  Tensor padded = Tensor::zeros({static_cast<size_t>(model.dims.frame_length),
                                 static_cast<size_t>(B)});
  for (size_t i = 0; i < bits.size(); ++i) padded.v[i] = bits[i];
  Tape tape;
  auto s_en_hat = sc_dequantize_node(tape, model, tape.constant(padded));
  auto probs = sc_decode_node(tape, model, s_en_hat, L_s);
  return argmax_rows(tape.val(probs));
}

inline Sentence sc_decode_bits(ScModel& model, const BitString& bits) {
  const int B = model.dims.bits_per_word;
  std::vector<int> rows = sc_infer_rows(model, bits);
  int L_s = static_cast<int>(bits.size()) / B;
  int len = 0;
  while (len < L_s && rows[len] != Vocabulary::kEos && rows[len] != Vocabulary::kPad) ++len;
  std::vector<int> ids(model.dims.frame_length, Vocabulary::kPad);
  for (int i = 0; i < len; ++i) ids[i] = rows[i];
  return Sentence(std::move(ids), len);
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

struct TrainHyper {
  double lr = 1e-3;
  int epochs = 60;
  int batch = 32;
  uint64_t seed = 1;
  double lr_decay = 1.0;  // per-epoch multiplicative decay

  double lr_at(int epoch) const { return lr * std::pow(lr_decay, epoch); }
};

struct EpochLog {
  int epoch;
  double loss;
};

namespace detail {

inline bool name_in_groups(const std::string& name, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes)
    if (name.rfind(p, 0) == 0) return true;
  return false;
}

// Runs one epoch of batched updates; `build` returns the loss node for one
// sentence. Only parameters whose names match `trainable` move.
template <typename BuildFn>
double run_epoch(ParameterStore& store, const std::vector<Sentence>& corpus,
                 const std::vector<std::string>& trainable, AdamState& adam,
                 const AdamHyper& hyper, int batch, uint64_t shuffle_key, BuildFn&& build) {
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(shuffle_key);
  std::shuffle(order.begin(), order.end(), rng);

  double epoch_loss = 0.0;
  size_t done = 0;
  while (done < order.size()) {
    size_t take = std::min(static_cast<size_t>(batch), order.size() - done);
    std::map<std::string, Tensor> acc;
    for (size_t b = 0; b < take; ++b) {
      const Sentence& s = corpus[order[done + b]];
      Tape tape;
      auto loss = build(tape, s, done + b);
      double value = tape.val(loss).v[0];
      if (!std::isfinite(value)) throw std::runtime_error("training diverged");
      epoch_loss += value;
      tape.backward(loss);
      for (auto& [name, g] : tape.param_grads()) {
        if (!name_in_groups(name, trainable)) continue;
        auto it = acc.find(name);
        if (it == acc.end()) {
          acc.emplace(name, std::move(g));
        } else {
          for (size_t i = 0; i < g.size(); ++i) it->second.v[i] += g.v[i];
        }
      }
    }
    for (auto& [name, g] : acc)
      for (double& x : g.v) x /= static_cast<double>(take);
    adam_step(store, acc, adam, hyper);
    done += take;
  }
  return epoch_loss / static_cast<double>(corpus.size());
}

}  // namespace detail

// Stage 1: quantizer bypassed (s_en fed straight to the decoder); CE loss
// over non-pad positions; trains the alpha groups only.
inline std::vector<EpochLog> train_stage1(ScModel& model, const std::vector<Sentence>& corpus,
                                          const TrainHyper& hyper) {
  AdamState adam;
  AdamHyper ah;
  ah.lr = hyper.lr;
  std::vector<EpochLog> log;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    ah.lr = hyper.lr_at(epoch);
    double loss = detail::run_epoch(
        model.store, corpus, {"alpha_en.", "alpha_de."}, adam, ah, hyper.batch,
        splitmix64(hyper.seed ^ (0x51ULL + epoch)),
        [&](Tape& tape, const Sentence& s, size_t) {
          auto s_en = sc_encode_node(tape, model, s);
          auto probs = sc_decode_node(tape, model, s_en, s.length);
          return tape.cross_entropy_rows(probs, s.ids, s.length);
        });
    log.push_back({epoch, loss});
  }
  return log;
}

// Stage 2: alpha groups frozen; theta_en/theta_de minimize MSE between the
// encoder output and its quantize/dequantize reconstruction over the first
// L_s rows.
inline std::vector<EpochLog> train_stage2(ScModel& model, const std::vector<Sentence>& corpus,
                                          const TrainHyper& hyper) {
  AdamState adam;
  AdamHyper ah;
  ah.lr = hyper.lr;
  std::vector<EpochLog> log;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    ah.lr = hyper.lr_at(epoch);
    double loss = detail::run_epoch(
        model.store, corpus, {"theta_en.", "theta_de."}, adam, ah, hyper.batch,
        splitmix64(hyper.seed ^ (0x52ULL + epoch)),
        [&](Tape& tape, const Sentence& s, size_t) {
          auto s_en = sc_encode_node(tape, model, s);
          auto bits = sc_quantize_node(tape, model, s_en, s.length);
          auto recon = sc_dequantize_node(tape, model, bits);
          size_t rows = static_cast<size_t>(s.length);
          auto a = tape.slice_cols(tape.reshape(recon, {1, tape.val(recon).size()}), 0,
                                   rows * model.dims.compressed());
          auto b = tape.slice_cols(tape.reshape(s_en, {1, tape.val(s_en).size()}), 0,
                                   rows * model.dims.compressed());
          return tape.mse(a, b);
        });
    log.push_back({epoch, loss});
  }
  return log;
}

// Stage 3: end-to-end fine-tuning of all four groups through the
// straight-through quantizer.
inline std::vector<EpochLog> train_stage3(ScModel& model, const std::vector<Sentence>& corpus,
                                          const TrainHyper& hyper) {
  AdamState adam;
  AdamHyper ah;
  ah.lr = hyper.lr;
  std::vector<EpochLog> log;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    ah.lr = hyper.lr_at(epoch);
    double loss = detail::run_epoch(
        model.store, corpus, {"alpha_en.", "alpha_de.", "theta_en.", "theta_de."}, adam, ah,
        hyper.batch, splitmix64(hyper.seed ^ (0x53ULL + epoch)),
        [&](Tape& tape, const Sentence& s, size_t) {
          auto s_en = sc_encode_node(tape, model, s);
          auto bits = sc_quantize_node(tape, model, s_en, s.length);
          auto recon = sc_dequantize_node(tape, model, bits);
          auto probs = sc_decode_node(tape, model, recon, s.length);
          return tape.cross_entropy_rows(probs, s.ids, s.length);
        });
    log.push_back({epoch, loss});
  }
  return log;
}

// Stage-2 exploration: fresh quantizer/dequantizer per candidate B on the
// same frozen trunk; reports the final reconstruction MSE per width.
inline std::map<int, double> stage2_b_sweep(const ScModel& trained,
                                            const std::vector<Sentence>& corpus,
                                            const std::vector<int>& candidates,
                                            const TrainHyper& hyper) {
  std::map<int, double> result;
  for (int b : candidates) {
    ScModel probe;
    probe.dims = trained.dims;
    probe.dims.bits_per_word = b;
    probe.pe = trained.pe;
    std::mt19937_64 rng(splitmix64(hyper.seed ^ (0xB0ULL + b)));
    for (const auto& [name, tensor] : trained.store.all())
      if (detail::name_in_groups(name, {"alpha_en.", "alpha_de."}))
        probe.store.add(name, tensor);
    init_dense(probe.store, "theta_en.quant", probe.dims.compressed(), b, rng);
    init_dense(probe.store, "theta_de.dequant", b, probe.dims.compressed(), rng);
    auto log = train_stage2(probe, corpus, hyper);
    result[b] = log.back().loss;
  }
  return result;
}

// Fraction of correctly reconstructed words at zero channel error.
inline double sc_word_accuracy(ScModel& model, const std::vector<Sentence>& corpus) {
  long correct = 0, total = 0;
  for (const Sentence& s : corpus) {
    auto rows = sc_infer_rows(model, sc_encode_bits(model, s));
    for (int i = 0; i < s.length; ++i) {
      correct += rows[i] == s.ids[i] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace semharq
