#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "semharq/harq.hpp"
#include "semharq/metrics.hpp"

namespace semharq {

// ---------------------------------------------------------------------------
// Experiment configuration (JSON file) and the BER sweep.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::vector<std::string> schemes{"huffman_rs", "series_sc_rs", "parallel_sc_rs", "scharq",
                                   "scharq_rs"};
  std::vector<std::string> detectors{"crc"};
  std::vector<double> ber_grid{0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.15, 0.2};
  int trials = 1000;
  uint64_t seed = 1;
  std::string train_corpus = "data/train.txt";
  std::string test_corpus = "data/test.txt";
  int vocab_size = 128;
  ModelDims dims;
  std::vector<int> scharq_lengths{48, 80, 160};
  std::string sc_checkpoint = "checkpoints/sc.ckpt";
  std::string scharq_checkpoint = "checkpoints/scharq.ckpt";
  std::string sim32_checkpoint = "checkpoints/sim32.ckpt";
};

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  ExperimentConfig cfg;
  if (j.contains("schemes")) cfg.schemes = j["schemes"].get<std::vector<std::string>>();
  if (j.contains("detectors")) cfg.detectors = j["detectors"].get<std::vector<std::string>>();
  if (j.contains("ber_grid")) cfg.ber_grid = j["ber_grid"].get<std::vector<double>>();
  if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("train_corpus")) cfg.train_corpus = j["train_corpus"].get<std::string>();
  if (j.contains("test_corpus")) cfg.test_corpus = j["test_corpus"].get<std::string>();
  if (j.contains("vocab_size")) cfg.vocab_size = j["vocab_size"].get<int>();
  if (j.contains("model")) {
    const auto& m = j["model"];
    if (m.contains("L")) cfg.dims.frame_length = m["L"].get<int>();
    if (m.contains("M")) cfg.dims.width = m["M"].get<int>();
    if (m.contains("B")) cfg.dims.bits_per_word = m["B"].get<int>();
    if (m.contains("blocks")) cfg.dims.blocks = m["blocks"].get<int>();
    if (m.contains("heads")) cfg.dims.heads = m["heads"].get<int>();
    if (m.contains("vocab")) cfg.dims.vocab = m["vocab"].get<int>();
  }
  if (j.contains("scharq_lengths"))
    cfg.scharq_lengths = j["scharq_lengths"].get<std::vector<int>>();
  if (j.contains("sc_checkpoint")) cfg.sc_checkpoint = j["sc_checkpoint"].get<std::string>();
  if (j.contains("scharq_checkpoint"))
    cfg.scharq_checkpoint = j["scharq_checkpoint"].get<std::string>();
  if (j.contains("sim32_checkpoint"))
    cfg.sim32_checkpoint = j["sim32_checkpoint"].get<std::string>();
  return cfg;
}

struct SweepResultRow {
  std::string scheme;
  std::string detector;
  double ber = 0.0;
  double wer = 0.0;
  double ser = 0.0;
  double bleu = 0.0;
  double avg_bits = 0.0;
  double received_rate = 0.0;
  double det_err_rate = 0.0;
  long n = 0;
  double wer_ci = 0.0;  // 95% half-width on the mean
  double ser_ci = 0.0;  // Wilson 95% half-width
};

// One (scheme, detector, ber) grid point: `trials` sessions cycling through
// the test corpus with channel noise keyed by (seed, trial, round).
inline SweepResultRow run_grid_point(SchemeKind scheme, DetectorKind detector, double ber,
                                     const std::vector<Sentence>& test_corpus,
                                     const HarqAssets& assets, const Tensor& embeddings,
                                     uint64_t seed, int trials) {
  SweepResultRow row;
  row.scheme = scheme_name(scheme);
  row.detector = detector_name(detector);
  row.ber = ber;
  row.n = trials;

  ChannelSpec channel{ChannelSpec::Kind::BitError, ber, seed};
  std::vector<double> wers, bits;
  long exact = 0, received = 0;
  long decision_errors = 0;
  double bleu_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Sentence& s = test_corpus[t % test_corpus.size()];
    auto transcript = run_session(scheme, s, assets, detector, channel, t);
    wers.push_back(wer(s, transcript.estimate));
    bits.push_back(static_cast<double>(transcript.total_bits));
    bleu_sum += bleu_score(s, transcript.estimate);
    bool is_exact = transcript.delivered && transcript.estimate == s;
    exact += is_exact ? 1 : 0;
    received += transcript.delivered ? 1 : 0;
    // Final-round decision audit: ground truth is exactness for CRC, the
    // similarity label for Sim32, and either one for the composite.
    if (!transcript.rounds.empty()) {
      const Sentence& est = transcript.estimate;
      bool truth = false;
      switch (detector) {
        case DetectorKind::Crc: truth = est == s; break;
        case DetectorKind::Sim32: truth = make_label(s, est, embeddings) == 1; break;
        case DetectorKind::CrcSim32:
          truth = est == s || make_label(s, est, embeddings) == 1;
          break;
      }
      if (transcript.rounds.back().accepted != truth) ++decision_errors;
    }
  }
  double wer_mean = 0.0;
  for (double w : wers) wer_mean += w;
  row.wer = wer_mean / trials;
  row.ser = 1.0 - static_cast<double>(exact) / trials;
  row.bleu = bleu_sum / trials;
  double bit_mean = 0.0;
  for (double b : bits) bit_mean += b;
  row.avg_bits = bit_mean / trials;
  row.received_rate = static_cast<double>(received) / trials;
  row.det_err_rate = static_cast<double>(decision_errors) / trials;
  row.wer_ci = mean_interval(wers).half_width();
  row.ser_ci = wilson_interval(trials - exact, trials).half_width();
  return row;
}

// Deterministic row order: scheme-major, then detector, then BER.
inline std::vector<SweepResultRow> run_sweep(const ExperimentConfig& cfg,
                                             const std::vector<Sentence>& test_corpus,
                                             const HarqAssets& assets,
                                             const Tensor& embeddings) {
  struct Point {
    SchemeKind scheme;
    DetectorKind detector;
    double ber;
  };
  std::vector<Point> points;
  for (const auto& scheme : cfg.schemes) {
    auto sk = scheme_from_name(scheme);
    if (!sk) throw std::invalid_argument("unknown scheme: " + scheme);
    for (const auto& det : cfg.detectors) {
      auto dk = detector_from_name(det);
      if (!dk) throw std::invalid_argument("unknown detector: " + det);
      for (double ber : cfg.ber_grid) points.push_back({*sk, *dk, ber});
    }
  }

  // Grid points are independent; a small worker pool fills a preallocated
  // row vector so the output order never depends on scheduling.
  std::vector<SweepResultRow> rows(points.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= points.size()) break;
      rows[i] = run_grid_point(points[i].scheme, points[i].detector, points[i].ber, test_corpus,
                               assets, embeddings, cfg.seed, cfg.trials);
    }
  };
  unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                     static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return rows;
}

inline constexpr const char* kSweepCsvHeader =
    "scheme,detector,ber,wer,ser,bleu,avg_bits,received_rate,det_err_rate,n,wer_ci,ser_ci";

inline std::string sweep_to_csv(const std::vector<SweepResultRow>& rows) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%s,%s,%.6g,%.6f,%.6f,%.6f,%.3f,%.6f,%.6f,%ld,%.6f,%.6f\n",
                  r.scheme.c_str(), r.detector.c_str(), r.ber, r.wer, r.ser, r.bleu, r.avg_bits,
                  r.received_rate, r.det_err_rate, r.n, r.wer_ci, r.ser_ci);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Asset loading shared by the CLI and the acceptance suite.
// ---------------------------------------------------------------------------

inline std::map<int, uint64_t> word_frequencies(const std::vector<Sentence>& corpus) {
  std::map<int, uint64_t> freq;
  for (const auto& s : corpus) {
    for (int id : s.words()) ++freq[id];
    ++freq[Vocabulary::kEos];
  }
  return freq;
}

// Every parameter of a checkpoint must exist in a freshly built model of the
// configured dimensions with the same shape.
inline void check_checkpoint_dims(const ParameterStore& loaded, const ParameterStore& expected,
                                  const std::string& what) {
  for (const auto& [name, tensor] : expected.all()) {
    if (!loaded.contains(name))
      throw std::runtime_error(what + " checkpoint missing parameter " + name);
    if (loaded.at(name).shape != tensor.shape)
      throw std::runtime_error(what + " checkpoint dim mismatch at " + name);
  }
  if (loaded.all().size() != expected.all().size())
    throw std::runtime_error(what + " checkpoint has unexpected parameters");
}

struct AssetBundle {
  Vocabulary vocab;
  std::vector<Sentence> train;
  std::vector<Sentence> test;
  HuffmanCodebook book;
  ScModel sc;
  ScharqModel scharq;
  Sim32Model sim;
  bool has_sc = false;
  bool has_scharq = false;
  bool has_sim = false;

  HarqAssets harq_assets() {
    HarqAssets a;
    a.frame_length = sc.dims.frame_length;
    a.book = &book;
    a.sc = has_sc ? &sc : nullptr;
    a.scharq = has_scharq ? &scharq : nullptr;
    a.sim = has_sim ? &sim : nullptr;
    return a;
  }
};

// Loads corpora, derives the vocabulary and Huffman codebook, and pulls in
// whichever checkpoints the config names (missing files are allowed unless
// `require_models`). Dim mismatches fail here, before any trial runs.
inline AssetBundle load_assets(const ExperimentConfig& cfg, bool require_models) {
  AssetBundle bundle;
  auto train_lines = load_corpus_lines(cfg.train_corpus);
  bundle.vocab = build_vocabulary(train_lines, cfg.vocab_size);
  bundle.train = encode_corpus(train_lines, bundle.vocab, cfg.dims.frame_length);
  bundle.test = encode_corpus(load_corpus_lines(cfg.test_corpus), bundle.vocab,
                              cfg.dims.frame_length);
  bundle.book = huffman_build(word_frequencies(bundle.train));

  // `store` starts as a freshly built model and doubles as the shape
  // reference for the dim check before being replaced.
  auto try_load = [&](const std::string& path, ParameterStore& store, const char* what) {
    std::ifstream probe(path);
    if (!probe) {
      if (require_models)
        throw std::runtime_error(std::string(what) + " checkpoint not found: " + path);
      return false;
    }
    probe.close();
    ParameterStore loaded = load_checkpoint(path);
    check_checkpoint_dims(loaded, store, what);
    store = std::move(loaded);
    return true;
  };

  bundle.sc = make_sc_model(cfg.dims, 0);
  bundle.has_sc = try_load(cfg.sc_checkpoint, bundle.sc.store, "sc");
  bundle.scharq = make_scharq_model(cfg.dims, cfg.scharq_lengths, 0);
  bundle.has_scharq = try_load(cfg.scharq_checkpoint, bundle.scharq.store, "scharq");
  bundle.sim = make_sim32_model(cfg.dims, 0);
  bundle.has_sim = try_load(cfg.sim32_checkpoint, bundle.sim.store, "sim32");
  return bundle;
}

// JSON-lines transcript log entry.
inline std::string transcript_to_json(const TransmissionTranscript& t, const Sentence& source) {
  nlohmann::json j;
  j["scheme"] = scheme_name(t.scheme);
  j["ber"] = t.ber;
  j["seed"] = t.seed;
  j["rounds"] = t.rounds.size();
  std::vector<size_t> per_round;
  for (const auto& r : t.rounds) per_round.push_back(r.payload_bits + r.overhead_bits);
  j["bits_per_round"] = per_round;
  j["outcome"] = t.delivered ? "delivered" : "sentence_error";
  j["wer_words"] = wer(source, t.estimate);
  j["bleu"] = bleu_score(source, t.estimate);
  return j.dump();
}

}  // namespace semharq
