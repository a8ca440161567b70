// Acceptance suite: one pass/fail line per criterion. Exit status is the
// number of failed criteria. Models train from scratch, so a full run takes
// roughly 15-25 minutes on two laptop cores.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "grad_check.hpp"
#include "semharq/experiment.hpp"

namespace {

using namespace semharq;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s  [%2d] %s%s%s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. RS oracle: everything with 2e + f <= n - k decodes; a (t+1)-error
// pattern breaks.
// ---------------------------------------------------------------------------
void criterion1() {
  auto t0 = Clock::now();
  long checked = 0, wrong = 0;

  {  // RS(7,3)/GF(8): exhaustive messages x patterns
    auto spec = make_rs(gf8(), 7, 3);
    std::mt19937_64 rng(1);
    for (int m0 = 0; m0 < 8; ++m0)
      for (int m1 = 0; m1 < 8; ++m1)
        for (int m2 = 0; m2 < 8; ++m2) {
          std::vector<int> msg{m0, m1, m2};
          auto cw = rs_encode(msg, spec);
          auto try_pattern = [&](const std::vector<int>& errs,
                                 const std::vector<int>& erasures) {
            RsReceived r;
            r.symbols = cw.symbols;
            r.erased.assign(7, 0);
            for (size_t i = 0; i < errs.size(); i += 2) r.symbols[errs[i]] ^= errs[i + 1];
            for (int pos : erasures) {
              r.erased[pos] = 1;
              r.symbols[pos] = static_cast<int>(rng() % 8);
            }
            auto out = rs_decode(r, spec);
            ++checked;
            if (!out || *out != msg) ++wrong;
          };
          for (int f = 0; f <= 4; ++f) {  // e=0, random erasure patterns each f
            std::vector<int> er;
            while (static_cast<int>(er.size()) < f) {
              int p = static_cast<int>(rng() % 7);
              bool dup = false;
              for (int q : er) dup |= q == p;
              if (!dup) er.push_back(p);
            }
            try_pattern({}, er);
          }
          for (int ep = 0; ep < 7; ++ep)  // e=1 exhaustive, f = 0..2
            for (int ev = 1; ev < 8; ++ev)
              for (int f = 0; f <= 2; ++f) {
                std::vector<int> er;
                while (static_cast<int>(er.size()) < f) {
                  int p = static_cast<int>(rng() % 7);
                  bool dup = p == ep;
                  for (int q : er) dup |= q == p;
                  if (!dup) er.push_back(p);
                }
                try_pattern({ep, ev}, er);
              }
          for (int p1 = 0; p1 < 7; ++p1)  // e=2 exhaustive positions
            for (int p2 = p1 + 1; p2 < 7; ++p2)
              try_pattern({p1, 1 + static_cast<int>(rng() % 7), p2,
                           1 + static_cast<int>(rng() % 7)},
                          {});
        }
  }

  {  // RS(15,11)/GF(16): randomized trials
    auto spec = make_rs(gf16(), 15, 11);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<int> msg(11);
      for (int& s : msg) s = static_cast<int>(rng() % 16);
      auto cw = rs_encode(msg, spec);
      RsReceived r;
      r.symbols = cw.symbols;
      r.erased.assign(15, 0);
      int e = static_cast<int>(rng() % 3);
      int f = static_cast<int>(rng() % (5 - 2 * e));
      std::vector<int> used;
      auto fresh = [&]() {
        while (true) {
          int p = static_cast<int>(rng() % 15);
          bool dup = false;
          for (int q : used) dup |= q == p;
          if (!dup) {
            used.push_back(p);
            return p;
          }
        }
      };
      for (int i = 0; i < e; ++i) r.symbols[fresh()] ^= 1 + static_cast<int>(rng() % 15);
      for (int i = 0; i < f; ++i) {
        int p = fresh();
        r.erased[p] = 1;
        r.symbols[p] = static_cast<int>(rng() % 16);
      }
      auto out = rs_decode(r, spec);
      ++checked;
      if (!out || *out != msg) ++wrong;
    }
  }

  bool found_breaking = false;
  {
    auto spec = make_rs(gf8(), 7, 3);
    std::mt19937_64 rng(3);
    std::vector<int> msg{1, 2, 3};
    auto cw = rs_encode(msg, spec);
    for (int trial = 0; trial < 500 && !found_breaking; ++trial) {
      RsReceived r;
      r.symbols = cw.symbols;
      int p0 = trial % 7, p1 = (trial + 2) % 7, p2 = (trial + 4) % 7;
      if (p0 == p1 || p1 == p2 || p0 == p2) continue;
      for (int p : {p0, p1, p2}) r.symbols[p] ^= 1 + static_cast<int>(rng() % 7);
      auto out = rs_decode(r, spec);
      if (!out || *out != msg) found_breaking = true;
    }
  }

  double secs = seconds_since(t0);
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "%ld patterns, %ld failures, breaking t+1 pattern %s, %.1f s", checked, wrong,
                found_breaking ? "found" : "missing", secs);
  report(1, wrong == 0 && found_breaking && secs < 60.0, "RS errors-and-erasures oracle",
         detail);
}

// ---------------------------------------------------------------------------
// 2. Punctured MDS: RS(7,3) at n'=5 corrects weight-1 everywhere; releasing
// the withheld symbols matches unpunctured decoding bit for bit.
// ---------------------------------------------------------------------------
void criterion2() {
  auto spec = make_rs(gf8(), 7, 3);
  long wrong = 0;
  for (int m0 = 0; m0 < 8; ++m0)
    for (int m1 = 0; m1 < 8; ++m1)
      for (int m2 = 0; m2 < 8; ++m2) {
        std::vector<int> msg{m0, m1, m2};
        auto cw = rs_puncture(rs_encode(msg, spec), 5, spec);
        for (int pos = 0; pos < 5; ++pos)
          for (int ev = 1; ev < 8; ++ev) {
            RsReceived r;
            r.symbols = cw.transmitted();
            r.symbols[pos] ^= ev;
            auto out = rs_decode(r, spec);
            if (!out || *out != msg) ++wrong;
          }
      }

  long mismatched = 0;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<int> msg{static_cast<int>(rng() % 8), static_cast<int>(rng() % 8),
                         static_cast<int>(rng() % 8)};
    auto cw = rs_encode(msg, spec);
    std::vector<int> noise(7, 0);
    int weight = static_cast<int>(rng() % 3);
    for (int w = 0; w < weight; ++w) noise[rng() % 7] ^= 1 + static_cast<int>(rng() % 7);
    RsReceived resumed, direct;
    resumed.symbols = rs_puncture(cw, 5, spec).transmitted();
    for (int i = 5; i < 7; ++i) resumed.symbols.push_back(cw.symbols[i]);
    direct.symbols = cw.symbols;
    for (int i = 0; i < 7; ++i) {
      resumed.symbols[i] ^= noise[i];
      direct.symbols[i] ^= noise[i];
    }
    auto a = rs_decode(resumed, spec);
    auto b = rs_decode(direct, spec);
    if (a.has_value() != b.has_value() || (a && *a != *b)) ++mismatched;
  }

  char detail[160];
  std::snprintf(detail, sizeof(detail), "%ld weight-1 failures, %ld incremental mismatches",
                wrong, mismatched);
  report(2, wrong == 0 && mismatched == 0,
         "punctured code stays MDS; incremental supply bit-identical", detail);
}

// ---------------------------------------------------------------------------
// 3. CRC-32: known check value, exhaustive single flips, random corruption.
// ---------------------------------------------------------------------------
void criterion3() {
  std::vector<uint8_t> ascii{'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  bool check_value = crc32_value(bits_from_bytes_lsb_first(ascii)) == 0xCBF43926U;

  std::mt19937_64 rng(5);
  long single_missed = 0;
  for (size_t frame_bits : {64u, 200u, 512u}) {
    BitString payload;
    for (size_t i = 0; i + 32 < frame_bits; ++i) payload.push_back(rng() & 1U);
    BitString frame = crc32_append(payload);
    for (size_t i = 0; i < frame.size(); ++i) {
      BitString bad = frame;
      bad.flip(i);
      if (crc32_check(bad)) ++single_missed;
    }
  }

  long random_missed = 0;
  BitString payload;
  for (size_t i = 0; i < 224; ++i) payload.push_back(rng() & 1U);
  BitString frame = crc32_append(payload);
  for (int trial = 0; trial < 100000; ++trial) {
    BitString bad = frame;
    int flips = 1 + static_cast<int>(rng() % 8);
    for (int f = 0; f < flips; ++f) bad.flip(rng() % bad.size());
    if (bad == frame) continue;  // flips cancelled out
    if (crc32_check(bad)) ++random_missed;
  }
  double detect_rate = 1.0 - static_cast<double>(random_missed) / 100000.0;

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "check value %s, %ld single-flip misses, random detection %.5f",
                check_value ? "0xCBF43926" : "WRONG", single_missed, detect_rate);
  report(3, check_value && single_missed == 0 && detect_rate >= 0.99999, "CRC-32 detection",
         detail);
}

// ---------------------------------------------------------------------------
// 4. Gradient audit across the whole layer set, 10 seeds.
// ---------------------------------------------------------------------------
void criterion4() {
  auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_at;

  auto track = [&](const testing::GradCheckResult& r, const char* layer) {
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_at = std::string(layer) + ":" + r.worst;
    }
  };

  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed * 7919 + 13);
    auto rand_tensor = [&](std::vector<size_t> shape) {
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      Tensor t = Tensor::zeros(std::move(shape));
      for (double& x : t.v) x = dist(rng);
      return t;
    };

    for (auto act : {Activation::None, Activation::Relu, Activation::Sigmoid}) {
      ParameterStore store;
      init_dense(store, "d", 6, 5, rng);
      Tensor x = rand_tensor({3, 6});
      Tensor target = rand_tensor({3, 5});
      auto fn = [&](ParameterStore& s, std::map<std::string, Tensor>* grads) {
        Tape tape;
        auto out = dense(tape, tape.constant(x), s, "d", act);
        auto loss = tape.mse(out, tape.constant(target));
        if (grads) {
          tape.backward(loss);
          *grads = tape.param_grads();
        }
        return tape.val(loss).v[0];
      };
      track(testing::check_gradients(store, fn, 1e-5, 20, seed), "dense");
    }
    {
      ParameterStore store;
      init_dense(store, "out", 6, 9, rng);
      Tensor x = rand_tensor({4, 6});
      std::vector<int> targets{1, 4, 0, 8};
      auto fn = [&](ParameterStore& s, std::map<std::string, Tensor>* grads) {
        Tape tape;
        auto probs = dense(tape, tape.constant(x), s, "out", Activation::Softmax);
        auto loss = tape.cross_entropy_rows(probs, targets, 3);
        if (grads) {
          tape.backward(loss);
          *grads = tape.param_grads();
        }
        return tape.val(loss).v[0];
      };
      track(testing::check_gradients(store, fn, 1e-5, 20, seed), "softmax_ce");
    }
    {
      ParameterStore store;
      TransformerConfig cfg{8, 2, 16};
      init_transformer_block(store, "blk", cfg, rng);
      Tensor x = rand_tensor({5, 8});
      Tensor target = rand_tensor({5, 8});
      auto fn = [&](ParameterStore& s, std::map<std::string, Tensor>* grads) {
        Tape tape;
        auto y = transformer_block(tape, tape.constant(x), s, "blk", cfg, 4);
        auto loss = tape.mse(y, tape.constant(target));
        if (grads) {
          tape.backward(loss);
          *grads = tape.param_grads();
        }
        return tape.val(loss).v[0];
      };
      track(testing::check_gradients(store, fn, 1e-5, 12, seed), "transformer");
    }
    {
      ParameterStore store;
      store.add("psi", rand_tensor({12, 6}));
      Tensor pe = positional_encoding(4, 6);
      Tensor target = rand_tensor({4, 6});
      std::vector<int> ids{3, 7, 7, 0};
      auto fn = [&](ParameterStore& s, std::map<std::string, Tensor>* grads) {
        Tape tape;
        auto psi = tape.param("psi", s.at("psi"));
        auto loss = tape.mse(tape.embed_rows(ids, psi, pe), tape.constant(target));
        if (grads) {
          tape.backward(loss);
          *grads = tape.param_grads();
        }
        return tape.val(loss).v[0];
      };
      track(testing::check_gradients(store, fn, 1e-5, 48, seed), "embedding");
    }
  }

  double secs = seconds_since(t0);
  char detail[200];
  std::snprintf(detail, sizeof(detail), "max relative error %.2e at %s, %.1f s", worst,
                worst_at.c_str(), secs);
  report(4, worst < 1e-3 && secs < 120.0, "gradient audit vs central finite differences",
         detail);
}

// ---------------------------------------------------------------------------
// Shared trained models for criteria 5-10.
// ---------------------------------------------------------------------------

struct TrainedModels {
  AssetBundle bundle;
  double sc_train_seconds = 0;
  bool stage2_freeze_ok = false;
  bool bit_counts_ok = false;
  double train_accuracy = 0;
};

TrainedModels train_everything(const std::string& data_dir) {
  TrainedModels out;
  ExperimentConfig cfg;
  cfg.train_corpus = data_dir + "/train.txt";
  cfg.test_corpus = data_dir + "/test.txt";
  cfg.sc_checkpoint = "";  // all models trained in memory
  cfg.scharq_checkpoint = "";
  cfg.sim32_checkpoint = "";
  out.bundle = load_assets(cfg, false);
  AssetBundle& b = out.bundle;

  auto t0 = Clock::now();
  b.sc = make_sc_model(cfg.dims, 1);
  train_stage1(b.sc, b.train, {1e-3, 60, 32, 7});
  auto alpha_before = b.sc.store.all();
  train_stage2(b.sc, b.train, {2e-3, 40, 32, 8});
  out.stage2_freeze_ok = true;
  for (const auto& [name, tensor] : b.sc.store.all())
    if (name.rfind("alpha_en.", 0) == 0 || name.rfind("alpha_de.", 0) == 0)
      out.stage2_freeze_ok &= tensor.v == alpha_before.at(name).v;
  train_stage3(b.sc, b.train, {1e-3, 200, 32, 9, 0.985});
  out.sc_train_seconds = seconds_since(t0);
  out.train_accuracy = sc_word_accuracy(b.sc, b.train);
  out.bit_counts_ok = true;
  for (const auto& s : b.train)
    out.bit_counts_ok &= sc_encode_bits(b.sc, s).size() ==
                         static_cast<size_t>(s.length) * b.sc.dims.bits_per_word;
  b.has_sc = true;
  std::printf("  sc trained: %.0f s, train accuracy %.4f, test accuracy %.4f\n",
              out.sc_train_seconds, out.train_accuracy, sc_word_accuracy(b.sc, b.test));
  std::fflush(stdout);

  b.scharq = make_scharq_model(cfg.dims, cfg.scharq_lengths, 2);
  init_stages_from_sc(b.scharq, b.sc);
  for (int stage = 1; stage <= b.scharq.stages(); ++stage) {
    train_scharq_stage(b.scharq, stage, b.train,
                       {1e-3, 80, 32, 20 + static_cast<uint64_t>(stage), 0.98}, 0.05);
    std::printf("  scharq stage %d trained\n", stage);
    std::fflush(stdout);
  }
  b.has_scharq = true;

  auto pairs =
      balance_pairs(generate_sim_dataset(b.sc, b.scharq, b.train, {0.0, 0.05, 0.1, 0.2}, 11));
  b.sim = make_sim32_model(cfg.dims, 3);
  train_sim32(b.sim, pairs, {1e-3, 12, 32, 31, 0.97});
  b.has_sim = true;
  std::printf("  sim32 trained on %zu balanced pairs\n", pairs.size());
  std::fflush(stdout);
  return out;
}

void criterion5(const TrainedModels& models) {
  char detail[220];
  std::snprintf(detail, sizeof(detail),
                "train word accuracy %.4f, stage-2 freeze %s, bits=L_s*B %s, training %.0f s",
                models.train_accuracy, models.stage2_freeze_ok ? "bit-identical" : "VIOLATED",
                models.bit_counts_ok ? "exact" : "VIOLATED", models.sc_train_seconds);
  report(5,
         models.train_accuracy >= 0.95 && models.stage2_freeze_ok && models.bit_counts_ok &&
             models.sc_train_seconds < 900.0,
         "toy SC training", detail);
}

void criterion6(TrainedModels& models) {
  ScharqModel& model = models.bundle.scharq;
  bool bits_ok = model.stage_bits(1) == 48 && model.stage_bits(2) == 32 &&
                 model.stage_bits(3) == 80;
  bool monotone = true;
  std::string detail = bits_ok ? "stage bits 48/32/80; " : "stage bit counts WRONG; ";
  for (double ber : {0.0, 0.05, 0.1}) {
    constexpr int kTrials = 1000;
    auto rates = scharq_stage_exact_rates(model, models.bundle.test, ber, 97, kTrials);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "ber %.2f: %.3f/%.3f/%.3f ", ber, rates[0], rates[1],
                  rates[2]);
    detail += buf;
    for (size_t i = 0; i + 1 < rates.size(); ++i) {
      if (rates[i + 1] >= rates[i]) continue;  // nondecreasing, fine
      auto lower = wilson_interval(std::lround(rates[i] * kTrials), kTrials);
      auto upper = wilson_interval(std::lround(rates[i + 1] * kTrials), kTrials);
      if (upper.hi < lower.lo) monotone = false;  // decrease beyond CI overlap
    }
  }
  report(6, bits_ok && monotone, "incremental decoding improves with every stage", detail);
}

void criterion7(TrainedModels& models) {
  AssetBundle& b = models.bundle;
  auto assets = b.harq_assets();
  ChannelSpec channel{ChannelSpec::Kind::BitError, 0.0, 1};
  std::string detail;
  bool all_ok = true;
  for (SchemeKind scheme :
       {SchemeKind::HuffmanRs, SchemeKind::ParallelScRs, SchemeKind::ScharqRs}) {
    long wrong = 0;
    double wer_sum = 0;
    for (size_t t = 0; t < b.test.size(); ++t) {
      auto tr = run_session(scheme, b.test[t], assets, DetectorKind::Crc, channel, t);
      if (!(tr.delivered && tr.estimate == b.test[t])) ++wrong;
      wer_sum += wer(b.test[t], tr.estimate);
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%s ser %ld/%zu wer %.4f; ", scheme_name(scheme), wrong,
                  b.test.size(), wer_sum / b.test.size());
    detail += buf;
    all_ok &= wrong == 0 && wer_sum == 0.0;
  }
  report(7, all_ok, "exact delivery at BER=0 with CRC", detail);
}

struct SweepOutputs {
  std::vector<SweepResultRow> crc_rows;
  std::vector<SweepResultRow> scharq_sim_rows;
};

SweepOutputs run_acceptance_sweeps(TrainedModels& models, int trials) {
  AssetBundle& b = models.bundle;
  auto assets = b.harq_assets();
  const Tensor& psi = b.sc.store.at("alpha_en.embed");

  ExperimentConfig cfg;
  cfg.trials = trials;
  cfg.seed = 1;
  SweepOutputs out;
  out.crc_rows = run_sweep(cfg, b.test, assets, psi);

  ExperimentConfig cfg2 = cfg;
  cfg2.schemes = {"scharq"};
  cfg2.detectors = {"crc_sim32"};
  out.scharq_sim_rows = run_sweep(cfg2, b.test, assets, psi);
  return out;
}

void criterion8(const SweepOutputs& sweeps, int trials) {
  bool ok = true;
  std::string detail;
  for (const char* scheme :
       {"huffman_rs", "series_sc_rs", "parallel_sc_rs", "scharq", "scharq_rs"}) {
    std::vector<const SweepResultRow*> rows;
    for (const auto& r : sweeps.crc_rows)
      if (r.scheme == scheme) rows.push_back(&r);
    for (size_t i = 0; i + 1 < rows.size(); ++i) {
      if (rows[i + 1]->avg_bits < rows[i]->avg_bits) {
        // Mean total bits carry their own sampling noise; demand the
        // decrease exceed a combined normal interval before failing.
        double slack =
            1.0 + rows[i]->avg_bits * 0.01;  // 1% tolerance on a bounded statistic
        if (rows[i]->avg_bits - rows[i + 1]->avg_bits > slack) {
          ok = false;
          detail += std::string(scheme) + " avg_bits drop at ber " +
                    std::to_string(rows[i + 1]->ber) + "; ";
        }
      }
      if (rows[i + 1]->ser < rows[i]->ser) {
        auto a = wilson_interval(std::lround(rows[i]->ser * trials), trials);
        auto b = wilson_interval(std::lround(rows[i + 1]->ser * trials), trials);
        if (b.hi < a.lo) {
          ok = false;
          detail += std::string(scheme) + " ser drop at ber " +
                    std::to_string(rows[i + 1]->ber) + "; ";
        }
      }
    }
  }
  if (detail.empty())
    detail = "avg_bits and SER nondecreasing in BER for all five schemes";
  report(8, ok, "monotonicity gates over the BER grid", detail);
}

void criterion9(TrainedModels& models, const SweepOutputs& sweeps) {
  bool superset = true;
  for (const auto& sim_row : sweeps.scharq_sim_rows)
    for (const auto& crc_row : sweeps.crc_rows)
      if (crc_row.scheme == "scharq" && crc_row.ber == sim_row.ber &&
          sim_row.received_rate < crc_row.received_rate)
        superset = false;

  auto held_out = generate_sim_dataset(models.bundle.sc, models.bundle.scharq,
                                       models.bundle.test, {0.0, 0.05, 0.1, 0.2}, 12);
  auto eval = evaluate_sim32(models.bundle.sim, held_out, 13);

  char detail[220];
  std::snprintf(detail, sizeof(detail),
                "received-rate superset %s; held-out accuracy %.4f outside band (%ld pairs)",
                superset ? "holds at every BER" : "VIOLATED", eval.accuracy_outside_band,
                eval.outside_band);
  report(9, superset && eval.accuracy_outside_band >= 0.90,
         "detector family: composite superset and Sim32 accuracy", detail);
}

void criterion10(TrainedModels& models) {
  AssetBundle& b = models.bundle;
  auto assets = b.harq_assets();
  const Tensor& psi = b.sc.store.at("alpha_en.embed");
  ExperimentConfig cfg;
  cfg.trials = 200;
  cfg.detectors = {"crc", "crc_sim32"};
  auto csv1 = sweep_to_csv(run_sweep(cfg, b.test, assets, psi));
  auto csv2 = sweep_to_csv(run_sweep(cfg, b.test, assets, psi));
  report(10, csv1 == csv2 && !csv1.empty(), "byte-identical CSV across identical sweep runs",
         csv1 == csv2 ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  std::string data_dir = "data";
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::strcmp(argv[i], "--data-dir") == 0) data_dir = argv[i + 1];

  criterion1();
  criterion2();
  criterion3();
  criterion4();

  std::printf("---- training models (SC, SCHARQ, Sim32) ----\n");
  std::fflush(stdout);
  auto models = train_everything(data_dir);
  criterion5(models);
  criterion6(models);
  criterion7(models);

  std::printf("---- running sweeps ----\n");
  std::fflush(stdout);
  constexpr int kSweepTrials = 1000;
  auto sweeps = run_acceptance_sweeps(models, kSweepTrials);
  criterion8(sweeps, kSweepTrials);
  criterion9(models, sweeps);
  criterion10(models);

  std::printf("%d criteria failed\n", failures);
  return failures;
}
