// Command-line front end: training, BER sweeps, and single-sentence traces.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "semharq/experiment.hpp"

namespace {

using namespace semharq;

TrainHyper hyper_from_json(const nlohmann::json& j, TrainHyper fallback) {
  TrainHyper h = fallback;
  if (j.contains("lr")) h.lr = j["lr"].get<double>();
  if (j.contains("epochs")) h.epochs = j["epochs"].get<int>();
  if (j.contains("batch")) h.batch = j["batch"].get<int>();
  if (j.contains("seed")) h.seed = j["seed"].get<uint64_t>();
  return h;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return nlohmann::json::parse(in);
}

void ensure_parent_dir(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void print_log_tail(const std::vector<EpochLog>& log, const char* stage) {
  if (log.empty()) return;
  std::printf("  %s: epoch %d loss %.6f -> epoch %d loss %.6f\n", stage, log.front().epoch,
              log.front().loss, log.back().epoch, log.back().loss);
}

int cmd_train_sc(const std::string& config_path) {
  auto j = read_json(config_path);
  auto cfg = load_experiment_config(config_path);
  auto bundle = load_assets(cfg, false);

  uint64_t init_seed = j.value("init_seed", 1);
  ScModel model = make_sc_model(cfg.dims, init_seed);
  TrainHyper defaults;
  auto h1 = hyper_from_json(j.value("stage1", nlohmann::json::object()), defaults);
  auto h2 = hyper_from_json(j.value("stage2", nlohmann::json::object()), defaults);
  auto h3 = hyper_from_json(j.value("stage3", nlohmann::json::object()), defaults);

  std::printf("training SC codec on %zu sentences (vocab %d)\n", bundle.train.size(),
              bundle.vocab.size());
  print_log_tail(train_stage1(model, bundle.train, h1), "stage 1 (CE, quantizer bypassed)");

  if (j.contains("b_sweep")) {
    auto widths = j["b_sweep"].get<std::vector<int>>();
    TrainHyper hs = h2;
    hs.epochs = std::max(1, hs.epochs / 2);
    std::printf("  bit-width sweep (reconstruction MSE per B):\n");
    for (const auto& [b, mse] : stage2_b_sweep(model, bundle.train, widths, hs))
      std::printf("    B=%d  mse %.6f\n", b, mse);
  }

  print_log_tail(train_stage2(model, bundle.train, h2), "stage 2 (MSE, trunks frozen)");
  print_log_tail(train_stage3(model, bundle.train, h3), "stage 3 (end-to-end fine-tune)");

  round_to_f32(model.store);
  ensure_parent_dir(cfg.sc_checkpoint);
  save_checkpoint(model.store, cfg.sc_checkpoint);
  {
    std::string vocab_path = j.value("vocab_out", std::string("checkpoints/vocab.txt"));
    ensure_parent_dir(vocab_path);
    save_vocabulary(bundle.vocab, vocab_path);
    std::string book_path = j.value("codebook_out", std::string("checkpoints/codebook.csv"));
    ensure_parent_dir(book_path);
    std::ofstream out(book_path);
    out << bundle.book.to_csv();
  }

  ScModel reloaded = make_sc_model(cfg.dims, 0);
  reloaded.store = load_checkpoint(cfg.sc_checkpoint);
  std::printf("train word accuracy at BER=0: %.4f\n", sc_word_accuracy(reloaded, bundle.train));
  std::printf("test  word accuracy at BER=0: %.4f\n", sc_word_accuracy(reloaded, bundle.test));
  std::printf("saved %s\n", cfg.sc_checkpoint.c_str());
  return 0;
}

int cmd_train_scharq(const std::string& config_path) {
  auto j = read_json(config_path);
  auto cfg = load_experiment_config(config_path);
  auto bundle = load_assets(cfg, false);
  if (!bundle.has_sc) {
    std::fprintf(stderr, "error: trained sc checkpoint required at %s\n",
                 cfg.sc_checkpoint.c_str());
    return 1;
  }

  uint64_t init_seed = j.value("init_seed", 2);
  ScharqModel model = make_scharq_model(cfg.dims, cfg.scharq_lengths, init_seed);
  init_stages_from_sc(model, bundle.sc);
  double train_ber = j.value("train_ber", 0.05);
  TrainHyper defaults;
  for (int stage = 1; stage <= model.stages(); ++stage) {
    auto h = hyper_from_json(j.value("stage" + std::to_string(stage), nlohmann::json::object()),
                             defaults);
    auto log = train_scharq_stage(model, stage, bundle.train, h, train_ber);
    std::printf("  incremental stage %d (n=%d): loss %.6f -> %.6f\n", stage,
                model.cumulative_lengths[stage - 1], log.front().loss, log.back().loss);
  }

  round_to_f32(model.store);
  ensure_parent_dir(cfg.scharq_checkpoint);
  save_checkpoint(model.store, cfg.scharq_checkpoint);

  ScharqModel reloaded = make_scharq_model(cfg.dims, cfg.scharq_lengths, 0);
  reloaded.store = load_checkpoint(cfg.scharq_checkpoint);
  for (double ber : {0.0, 0.05, 0.1}) {
    auto rates = scharq_stage_exact_rates(reloaded, bundle.test, ber, cfg.seed, 500);
    std::printf("exact-sentence rate at BER=%.2f:", ber);
    for (double r : rates) std::printf(" %.3f", r);
    std::printf("\n");
  }
  std::printf("saved %s\n", cfg.scharq_checkpoint.c_str());
  return 0;
}

int cmd_train_sim32(const std::string& config_path) {
  auto j = read_json(config_path);
  auto cfg = load_experiment_config(config_path);
  auto bundle = load_assets(cfg, false);
  if (!bundle.has_sc || !bundle.has_scharq) {
    std::fprintf(stderr, "error: trained sc and scharq checkpoints required\n");
    return 1;
  }

  std::vector<double> bers = j.value("dataset_bers", std::vector<double>{0.0, 0.05, 0.1, 0.2});
  uint64_t data_seed = j.value("dataset_seed", 11);
  auto train_pairs =
      balance_pairs(generate_sim_dataset(bundle.sc, bundle.scharq, bundle.train, bers, data_seed));
  auto test_pairs =
      generate_sim_dataset(bundle.sc, bundle.scharq, bundle.test, bers, data_seed + 1);
  std::printf("labeled pairs: %zu train (balanced), %zu held out\n", train_pairs.size(),
              test_pairs.size());
  if (j.contains("dataset_out")) {
    std::string path = j["dataset_out"].get<std::string>();
    ensure_parent_dir(path);
    save_pairs_csv(train_pairs, path);
  }

  Sim32Model model = make_sim32_model(cfg.dims, j.value("init_seed", 3));
  TrainHyper h = hyper_from_json(j.value("train", nlohmann::json::object()), TrainHyper{});
  auto log = train_sim32(model, train_pairs, h);
  print_log_tail(log, "sim32 (binary CE)");

  round_to_f32(model.store);
  ensure_parent_dir(cfg.sim32_checkpoint);
  save_checkpoint(model.store, cfg.sim32_checkpoint);

  Sim32Model reloaded = make_sim32_model(cfg.dims, 0);
  reloaded.store = load_checkpoint(cfg.sim32_checkpoint);
  auto eval = evaluate_sim32(reloaded, test_pairs, data_seed + 2);
  std::printf(
      "held-out decision accuracy: %.4f overall, %.4f outside [0.9, 0.99] band (%ld pairs)\n",
      eval.accuracy_all, eval.accuracy_outside_band, eval.outside_band);
  std::printf("saved %s\n", cfg.sim32_checkpoint.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, std::optional<double> ber_override,
              std::optional<uint64_t> seed_override, const std::string& out_path,
              const std::string& log_path) {
  auto cfg = load_experiment_config(config_path);
  if (ber_override) cfg.ber_grid = {*ber_override};
  if (seed_override) cfg.seed = *seed_override;

  bool needs_models = false;
  for (const auto& s : cfg.schemes) needs_models |= s != "huffman_rs";
  for (const auto& d : cfg.detectors) needs_models |= d != "crc";
  auto bundle = load_assets(cfg, needs_models);
  auto assets = bundle.harq_assets();

  auto rows = run_sweep(cfg, bundle.test, assets, bundle.sc.store.at("alpha_en.embed"));
  std::string csv = sweep_to_csv(rows);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    ensure_parent_dir(out_path);
    std::ofstream out(out_path, std::ios::binary);
    out << csv;
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
  }

  if (!log_path.empty()) {
    ensure_parent_dir(log_path);
    std::ofstream log(log_path);
    auto dk = detector_from_name(cfg.detectors.front());
    ChannelSpec channel{ChannelSpec::Kind::BitError, cfg.ber_grid.front(), cfg.seed};
    for (const auto& scheme : cfg.schemes) {
      auto sk = scheme_from_name(scheme);
      for (int t = 0; t < std::min(cfg.trials, 100); ++t) {
        const Sentence& s = bundle.test[t % bundle.test.size()];
        auto transcript = run_session(*sk, s, assets, *dk, channel, t);
        log << transcript_to_json(transcript, s) << '\n';
      }
    }
    std::printf("wrote transcript log to %s\n", log_path.c_str());
  }
  return 0;
}

int cmd_demo(const std::string& config_path, const std::string& scheme_name_str, double ber,
             uint64_t seed, uint64_t trial, const std::string& detector_name_str) {
  auto cfg = load_experiment_config(config_path);
  auto scheme = scheme_from_name(scheme_name_str);
  if (!scheme) {
    std::fprintf(stderr, "error: unknown scheme '%s'\n", scheme_name_str.c_str());
    return 1;
  }
  auto detector = detector_from_name(detector_name_str);
  if (!detector) {
    std::fprintf(stderr, "error: unknown detector '%s'\n", detector_name_str.c_str());
    return 1;
  }
  bool needs_models = *scheme != SchemeKind::HuffmanRs || *detector != DetectorKind::Crc;
  auto bundle = load_assets(cfg, needs_models);
  auto assets = bundle.harq_assets();

  const Sentence& s = bundle.test[trial % bundle.test.size()];
  ChannelSpec channel{ChannelSpec::Kind::BitError, ber, seed};
  auto t = run_session(*scheme, s, assets, *detector, channel, trial);

  auto words_of = [&](const Sentence& sent) {
    std::string text;
    for (int id : sent.words()) text += (text.empty() ? "" : " ") + bundle.vocab.token_of(id);
    return text.empty() ? std::string("(empty)") : text;
  };
  std::printf("scheme %s, detector %s, BER %.3f, seed %llu, trial %llu\n", scheme_name(*scheme),
              detector_name(*detector), ber, static_cast<unsigned long long>(seed),
              static_cast<unsigned long long>(trial));
  std::printf("source   [%d words]: %s\n", s.length, words_of(s).c_str());
  for (const auto& r : t.rounds)
    std::printf("round %d: %5zu payload + %2zu overhead bits -> %s\n", r.round, r.payload_bits,
                r.overhead_bits, r.accepted ? "ACK" : "NACK");
  std::printf("outcome: %s after %zu round(s), %zu bits total\n",
              t.delivered ? "delivered" : "sentence error", t.rounds.size(), t.total_bits);
  std::printf("estimate [%d words]: %s\n", t.estimate.length, words_of(t.estimate).c_str());
  std::printf("wer %.4f  bleu %.4f\n", wer(s, t.estimate), bleu_score(s, t.estimate));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sentence transmission simulator: semantic codecs, RS incremental-redundancy "
      "HARQ, and learned error detection over a binary symmetric channel"};
  app.require_subcommand(1);

  std::string config_path = "configs/sweep.json";
  std::optional<double> ber_override;
  std::optional<uint64_t> seed_override;
  std::string out_path, log_path;

  auto* train_sc = app.add_subcommand("train-sc", "train the semantic codec (three stages)");
  train_sc->add_option("--config", config_path, "training config JSON");

  auto* train_scharq =
      app.add_subcommand("train-scharq", "train the incremental codec stage by stage");
  train_scharq->add_option("--config", config_path, "training config JSON");

  auto* train_sim = app.add_subcommand("train-sim32", "train the similarity detector");
  train_sim->add_option("--config", config_path, "training config JSON");

  auto* sweep = app.add_subcommand("sweep", "run the BER grid and emit CSV");
  sweep->add_option("--config", config_path, "experiment config JSON");
  double ber_value = 0.0;
  auto* ber_opt = sweep->add_option("--ber", ber_value, "restrict the grid to one BER");
  uint64_t seed_value = 0;
  auto* seed_opt = sweep->add_option("--seed", seed_value, "override the experiment seed");
  sweep->add_option("--out", out_path, "CSV output path (stdout if omitted)");
  sweep->add_option("--log", log_path, "JSON-lines transcript log path");

  auto* demo = app.add_subcommand("demo", "trace one sentence round by round");
  demo->add_option("--config", config_path, "experiment config JSON");
  std::string demo_scheme = "scharq";
  demo->add_option("--scheme", demo_scheme, "transmission scheme");
  double demo_ber = 0.05;
  demo->add_option("--ber", demo_ber, "bit error rate");
  uint64_t demo_seed = 7, demo_trial = 0;
  demo->add_option("--seed", demo_seed, "channel seed");
  demo->add_option("--trial", demo_trial, "test-sentence index");
  std::string demo_detector = "crc";
  demo->add_option("--detector", demo_detector, "crc | sim32 | crc_sim32");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_sc->parsed()) return cmd_train_sc(config_path);
    if (train_scharq->parsed()) return cmd_train_scharq(config_path);
    if (train_sim->parsed()) return cmd_train_sim32(config_path);
    if (sweep->parsed()) {
      if (*ber_opt) ber_override = ber_value;
      if (*seed_opt) seed_override = seed_value;
      return cmd_sweep(config_path, ber_override, seed_override, out_path, log_path);
    }
    if (demo->parsed())
      return cmd_demo(config_path, demo_scheme, demo_ber, demo_seed, demo_trial, demo_detector);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
