// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end:
//   tse make-corpus  --out DIR [--speakers N --utterances N --seconds S --seed N]
//   tse synth-data   --corpus DIR --out DIR --n INT --seed INT
//   tse train        --config FILE --train-manifest F --val-manifest F --out DIR [--seed INT] [--toy]
//   tse eval         --manifest F --checkpoint F --out report.json
//   tse extract      --mix F --ref F --checkpoint F --out F
//   tse report       --in report.json

#include <iostream>

#include "CLI11.hpp"
#include "tse/tse.hpp"

namespace {

int run_make_corpus(const std::string& out, int speakers, int utterances, double seconds, uint64_t seed) {
  tse::synthetic::write_corpus(out, speakers, utterances, seconds, seed);
  std::cout << "wrote " << speakers << " speakers x " << utterances << " utterances to " << out << "\n";
  return 0;
}

int run_synth(const std::string& corpus, const std::string& out, std::size_t n, uint64_t seed) {
  tse::SynthOptions opts;
  opts.n_examples = n;
  opts.seed = seed;
  opts.log = &std::cerr;
  auto m = tse::synth_dataset(corpus, out, opts);
  std::cout << "wrote " << m.records.size() << " examples; manifest "
            << (std::filesystem::path(out) / "manifest.tsv").string() << "\n";
  return 0;
}

int run_train(const std::string& config, const std::string& train_manifest, const std::string& val_manifest,
              const std::string& out, std::optional<uint64_t> seed, bool toy) {
  tse::TrainConfig base;
  if (toy) base.apply_toy();
  tse::TrainConfig cfg = config.empty() ? base : tse::read_config(config, base);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  auto train = tse::load_examples(tse::read_manifest(train_manifest));
  auto val = tse::load_examples(tse::read_manifest(val_manifest));
  std::filesystem::create_directories(out);
  {
    std::ofstream snap(std::filesystem::path(out) / "config.json");
    snap << tse::config_to_json(cfg).dump(2) << "\n";
  }
  tse::Trainer trainer(cfg);
  auto result = trainer.fit(train, val, out, &std::cout);
  std::cout << "best epoch " << result.best_epoch << " (val SI-SNRi " << trainer.best_metric() << " dB); "
            << result.best_checkpoint.string() << "\n";
  return 0;
}

int run_eval(const std::string& manifest, const std::string& checkpoint, const std::string& out) {
  auto report = tse::evaluate(manifest, checkpoint);
  tse::write_report(out, report);
  std::cout << tse::render_table(report);
  return report.failures.empty() ? 0 : 2;
}

int run_extract(const std::string& mix, const std::string& ref, const std::string& checkpoint,
                const std::string& out) {
  auto model = tse::Trainer::load(checkpoint);
  auto est = tse::extract_file(*model, mix, ref, out);
  std::cout << "wrote " << out << " (" << est.size() << " samples @ " << est.sample_rate << " Hz)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target speaker extraction: data synthesis, training, evaluation"};
  app.require_subcommand(1);

  std::string out, corpus, config, train_manifest, val_manifest, manifest, checkpoint, mix, ref, in;
  int speakers = 8, utterances = 4;
  double seconds = 6.0;
  std::size_t n = 0;
  uint64_t seed = 0;
  std::optional<uint64_t> train_seed;
  bool toy = false;

  auto* corpus_cmd = app.add_subcommand("make-corpus", "Render a synthetic multi-speaker corpus");
  corpus_cmd->add_option("--out", out, "Output directory")->required();
  corpus_cmd->add_option("--speakers", speakers, "Number of speakers")->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--utterances", utterances, "Utterances per speaker")->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--seconds", seconds, "Utterance duration")->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--seed", seed, "Random seed");

  auto* synth_cmd = app.add_subcommand("synth-data", "Build two-speaker mixtures and a manifest");
  synth_cmd->add_option("--corpus", corpus, "Corpus directory (one subdirectory per speaker)")->required();
  synth_cmd->add_option("--out", out, "Output directory")->required();
  synth_cmd->add_option("--n", n, "Number of examples")->required();
  synth_cmd->add_option("--seed", seed, "Random seed")->required();

  auto* train_cmd = app.add_subcommand("train", "Train the extractor");
  train_cmd->add_option("--config", config, "JSON config file");
  train_cmd->add_option("--train-manifest", train_manifest, "Training manifest")->required();
  train_cmd->add_option("--val-manifest", val_manifest, "Validation manifest")->required();
  train_cmd->add_option("--out", out, "Output directory")->required();
  train_cmd->add_option("--seed", train_seed, "Override the config seed");
  train_cmd->add_flag("--toy", toy, "Desk-scale model sizes");

  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a manifest");
  eval_cmd->add_option("--manifest", manifest, "Test manifest")->required();
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--out", out, "Report JSON path")->required();

  auto* extract_cmd = app.add_subcommand("extract", "Extract the target speaker from one mixture");
  extract_cmd->add_option("--mix", mix, "Mixture WAV")->required();
  extract_cmd->add_option("--ref", ref, "Reference WAV of the target speaker")->required();
  extract_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  extract_cmd->add_option("--out", out, "Output WAV")->required();

  auto* report_cmd = app.add_subcommand("report", "Render an evaluation report as a table");
  report_cmd->add_option("--in", in, "Report JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corpus_cmd) return run_make_corpus(out, speakers, utterances, seconds, seed);
    if (*synth_cmd) return run_synth(corpus, out, n, seed);
    if (*train_cmd) return run_train(config, train_manifest, val_manifest, out, train_seed, toy);
    if (*eval_cmd) return run_eval(manifest, checkpoint, out);
    if (*extract_cmd) return run_extract(mix, ref, checkpoint, out);
    if (*report_cmd) {
      std::cout << tse::render_table(tse::read_report(in));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
