#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/autodiff.hpp"
#include "semharq/tensor.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// Named trainable tensors.
// ---------------------------------------------------------------------------

class ParameterStore {
 public:
  Tensor& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }
  const Tensor& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }

  void add(const std::string& name, Tensor t) {
    if (params_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    params_.emplace(name, std::move(t));
  }

  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  const std::map<std::string, Tensor>& all() const { return params_; }
  std::map<std::string, Tensor>& all() { return params_; }

 private:
  std::map<std::string, Tensor> params_;  // ordered: deterministic iteration
};

// ---------------------------------------------------------------------------
// Adam.
// ---------------------------------------------------------------------------

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::map<std::string, Tensor> m, v;
  int64_t t = 0;
};

// Applies one adaptive-moment step to every parameter present in `grads`.
// Parameters absent from `grads` are frozen: neither values nor moments move.
inline void adam_step(ParameterStore& store, const std::map<std::string, Tensor>& grads,
                      AdamState& state, const AdamHyper& hyper) {
  ++state.t;
  double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  for (const auto& [name, g] : grads) {
    Tensor& p = store.at(name);
    if (!p.same_shape(g)) throw std::invalid_argument("gradient shape mismatch: " + name);
    Tensor& m = state.m.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    for (size_t i = 0; i < p.size(); ++i) {
      m.v[i] = hyper.beta1 * m.v[i] + (1.0 - hyper.beta1) * g.v[i];
      v.v[i] = hyper.beta2 * v.v[i] + (1.0 - hyper.beta2) * g.v[i] * g.v[i];
      double mhat = m.v[i] / bc1;
      double vhat = v.v[i] / bc2;
      p.v[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Layer builders. Each takes the store plus a name prefix; parameters are
// created once by the matching init_* call.
// ---------------------------------------------------------------------------

enum class Activation { None, Relu, Sigmoid, Softmax };

inline void init_dense(ParameterStore& store, const std::string& prefix, size_t in, size_t out,
                       std::mt19937_64& rng) {
  store.add(prefix + ".w", uniform_init({in, out}, in, rng));
  store.add(prefix + ".b", uniform_init({out}, in, rng));
}

inline Tape::NodeId dense(Tape& tape, Tape::NodeId x, ParameterStore& store,
                          const std::string& prefix, Activation act = Activation::None) {
  auto w = tape.param(prefix + ".w", store.at(prefix + ".w"));
  auto b = tape.param(prefix + ".b", store.at(prefix + ".b"));
  auto y = tape.add_row_bias(tape.matmul(x, w), b);
  switch (act) {
    case Activation::None: return y;
    case Activation::Relu: return tape.relu(y);
    case Activation::Sigmoid: return tape.sigmoid(y);
    case Activation::Softmax: return tape.softmax_rows(y);
  }
  throw std::logic_error("unreachable");
}

// Sinusoidal position encoding (constant, non-trainable).
inline Tensor positional_encoding(size_t length, size_t width) {
  Tensor pe = Tensor::zeros({length, width});
  for (size_t pos = 0; pos < length; ++pos) {
    for (size_t i = 0; i < width; i += 2) {
      double angle = static_cast<double>(pos) /
                     std::pow(10000.0, static_cast<double>(i) / static_cast<double>(width));
      pe.at(pos, i) = std::sin(angle);
      if (i + 1 < width) pe.at(pos, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

inline void init_layer_norm(ParameterStore& store, const std::string& prefix, size_t width) {
  store.add(prefix + ".gamma", Tensor::full({width}, 1.0));
  store.add(prefix + ".beta", Tensor::zeros({width}));
}

inline Tape::NodeId layer_norm(Tape& tape, Tape::NodeId x, ParameterStore& store,
                               const std::string& prefix) {
  auto gamma = tape.param(prefix + ".gamma", store.at(prefix + ".gamma"));
  auto beta = tape.param(prefix + ".beta", store.at(prefix + ".beta"));
  return tape.layer_norm(x, gamma, beta);
}

inline void init_attention(ParameterStore& store, const std::string& prefix, size_t width,
                           std::mt19937_64& rng) {
  init_dense(store, prefix + ".q", width, width, rng);
  init_dense(store, prefix + ".k", width, width, rng);
  init_dense(store, prefix + ".v", width, width, rng);
  init_dense(store, prefix + ".o", width, width, rng);
}

// Multi-head self-attention. Keys/values at rows >= valid_rows are masked out
// when valid_rows > 0 (pad masking); queries at pad rows still produce output
// but cannot influence rows below valid_rows.
inline Tape::NodeId multi_head_attention(Tape& tape, Tape::NodeId x, ParameterStore& store,
                                         const std::string& prefix, size_t heads,
                                         size_t valid_rows = 0) {
  const size_t width = tape.val(x).cols();
  if (width % heads != 0) throw std::invalid_argument("width not divisible by head count");
  const size_t dk = width / heads;
  auto q = dense(tape, x, store, prefix + ".q");
  auto k = dense(tape, x, store, prefix + ".k");
  auto v = dense(tape, x, store, prefix + ".v");
  std::vector<Tape::NodeId> outputs;
  for (size_t h = 0; h < heads; ++h) {
    auto qh = tape.slice_cols(q, h * dk, (h + 1) * dk);
    auto kh = tape.slice_cols(k, h * dk, (h + 1) * dk);
    auto vh = tape.slice_cols(v, h * dk, (h + 1) * dk);
    auto scores = tape.scale(tape.matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dk)));
    auto weights = tape.softmax_rows(scores, valid_rows);
    outputs.push_back(tape.matmul(weights, vh));
  }
  auto merged = tape.concat_cols(outputs);
  return dense(tape, merged, store, prefix + ".o");
}

struct TransformerConfig {
  size_t width = 32;
  size_t heads = 2;
  size_t ff_width = 128;  // 4x width
};

inline void init_transformer_block(ParameterStore& store, const std::string& prefix,
                                   const TransformerConfig& cfg, std::mt19937_64& rng) {
  init_attention(store, prefix + ".attn", cfg.width, rng);
  init_layer_norm(store, prefix + ".ln1", cfg.width);
  init_dense(store, prefix + ".ff1", cfg.width, cfg.ff_width, rng);
  init_dense(store, prefix + ".ff2", cfg.ff_width, cfg.width, rng);
  init_layer_norm(store, prefix + ".ln2", cfg.width);
}

// Post-norm block: LN(x + MHA(x)) then LN(y + FF(y)).
inline Tape::NodeId transformer_block(Tape& tape, Tape::NodeId x, ParameterStore& store,
                                      const std::string& prefix, const TransformerConfig& cfg,
                                      size_t valid_rows = 0) {
  auto attn = multi_head_attention(tape, x, store, prefix + ".attn", cfg.heads, valid_rows);
  auto y = layer_norm(tape, tape.add(x, attn), store, prefix + ".ln1");
  auto ff = dense(tape, tape.relu(dense(tape, y, store, prefix + ".ff1")), store, prefix + ".ff2");
  return layer_norm(tape, tape.add(y, ff), store, prefix + ".ln2");
}

// ---------------------------------------------------------------------------
// Checkpoints: magic "SEMHARQ1", then per parameter (in name order):
// u32 name length, name bytes, u32 rank, u32 dims, little-endian f32 values.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[8] = {'S', 'E', 'M', 'H', 'A', 'R', 'Q', '1'};

inline void save_checkpoint(const ParameterStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  auto put_u32 = [&](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  for (const auto& [name, tensor] : store.all()) {
    put_u32(static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(static_cast<uint32_t>(tensor.shape.size()));
    for (size_t d : tensor.shape) put_u32(static_cast<uint32_t>(d));
    for (double x : tensor.v) {
      float f = static_cast<float>(x);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(bits);
    }
  }
}

inline ParameterStore load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  auto get_u32 = [&]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  };
  ParameterStore store;
  while (in.peek() != EOF) {
    uint32_t name_len = get_u32();
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint32_t rank = get_u32();
    std::vector<size_t> shape(rank);
    for (auto& d : shape) d = get_u32();
    Tensor t = Tensor::zeros(shape);
    for (double& x : t.v) {
      uint32_t bits = get_u32();
      float f;
      std::memcpy(&f, &bits, 4);
      x = static_cast<double>(f);
    }
    store.add(name, std::move(t));
  }
  return store;
}

// Rounds every parameter through 32-bit precision, exactly as a checkpoint
// save/load round trip would.
inline void round_to_f32(ParameterStore& store) {
  for (auto& [name, tensor] : store.all())
    for (double& x : tensor.v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace semharq
