// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--work-dir DIR] [--only N ...] [--max-steps N]

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "test_util.hpp"

using namespace tse;
using namespace tse::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::vector<const MixtureExample*> ptrs(const std::vector<MixtureExample>& v) {
  std::vector<const MixtureExample*> out;
  for (const auto& e : v) out.push_back(&e);
  return out;
}

// 1 ---------------------------------------------------------------------------

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    auto s = random_vector(gen, 256);
    auto e = random_vector(gen, 256);
    const double ms = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    const double me = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
    for (double& v : s) v -= ms;
    for (double& v : e) v -= me;
    worst = std::max(worst, std::abs(si_snr(Waveform(s, 8000), Waveform(e, 8000)) - si_snr_oracle(s, e)));
  }
  const double zero_db = si_snr(Waveform({1, -1, 1, -1}, 8000), Waveform({1, -1, 0, 0}, 8000));
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && std::abs(zero_db) < 1e-6 && secs < 1.0,
          "max |si_snr - oracle| = " + fmt(worst) + " dB over 100 pairs; hand case = " + fmt(zero_db) +
              " dB; " + fmt(secs) + " s"};
}

// 2 ---------------------------------------------------------------------------

Outcome invariance() {
  std::mt19937_64 gen(2);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    auto s = torch::tensor(random_vector(gen, 400), f64());
    auto e = s + torch::tensor(random_vector(gen, 400, 0.8), f64());
    const double base = si_snr(s, e).item<double>();
    for (double a : {0.1, 1.0, 10.0})
      for (double b : {0.0, 0.3}) worst = std::max(worst, std::abs(si_snr(s, a * e + b).item<double>() - base));
  }
  return {worst < 1e-4, "max deviation " + fmt(worst) + " dB over 50 pairs x 6 (alpha, beta)"};
}

// 3 ---------------------------------------------------------------------------

double max_rel_error(const std::function<torch::Tensor()>& loss, torch::Tensor x, uint64_t seed) {
  if (x.grad().defined()) x.mutable_grad().zero_();
  loss().backward();
  const auto grad = x.grad().clone();
  std::mt19937_64 gen(seed);
  auto scalar = [&] {
    torch::NoGradGuard g;
    return loss().item<double>();
  };
  double worst = 0;
  for (auto idx : probe_indices(grad, 20, gen)) worst = std::max(worst, probe_gradient(scalar, x, grad, idx).rel_error);
  return worst;
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  torch::manual_seed(3);
  std::map<std::string, double> err;

  auto s = torch::randn({2, 400}, f64());
  auto e = (s + 0.5 * torch::randn({2, 400}, f64())).requires_grad_(true);
  err["wrql"] = max_rel_error([&] { return wrql(s, e); }, e, 1);

  SpeakerEncoder enc(SpeakerEncoderConfig{32, 3, 256});
  enc->to(torch::kFloat64);
  auto ref = torch::randn({2, 3200}, f64()) * 0.3;
  auto est = (torch::randn({2, 1600}, f64()) * 0.3).requires_grad_(true);
  err["secl"] = max_rel_error([&] { return secl(enc, ref, est); }, est, 2);

  SeparatorConfig sc = SeparatorConfig::toy();
  WaveformEncoder we(sc);
  WaveformDecoder wd(sc);
  we->to(torch::kFloat64);
  wd->to(torch::kFloat64);
  auto m = torch::rand({1, 64, 40}, f64()).requires_grad_(true);
  err["icl"] = max_rel_error([&] { return icl(m, we, wd); }, m, 3);

  MultiScaleDiscriminator d(DiscriminatorConfig::toy());
  d->to(torch::kFloat64);
  auto g = (torch::randn({2, 800}, f64()) * 0.3).requires_grad_(true);
  err["gen_adv_loss"] = max_rel_error([&] { return gen_adv_loss(d, g); }, g, 4);

  bool ok = true;
  std::string detail;
  for (const auto& [k, v] : err) {
    ok &= v < 1e-3;
    detail += k + " " + fmt(v) + "; ";
  }
  const double secs = seconds_since(t0);
  ok &= secs < 120;
  return {ok, "max relative error " + detail + "20 probes each, float64, h=1e-6; " + fmt(secs) + " s"};
}

// 4 ---------------------------------------------------------------------------

Outcome shape_pipeline() {
  torch::manual_seed(4);
  Separator sep(SeparatorConfig::toy());
  SpeakerEncoder enc(SpeakerEncoderConfig::toy());
  torch::NoGradGuard g;
  auto mix = torch::randn({1, 24000}) * 0.2;
  auto e = enc->forward(torch::randn({1, 32000}) * 0.2);
  auto out = sep->forward(mix, e);
  const bool ok = out.latent.sizes() == torch::IntArrayRef{1, 64, 2999} &&
                  out.mask.sizes() == torch::IntArrayRef{1, 64, 2999} &&
                  out.estimate.sizes() == torch::IntArrayRef{1, 24000} && out.mask.min().item<double>() >= 0 &&
                  out.mask.max().item<double>() <= 1 && (24000 - 16) / 8 + 1 == 2999;
  std::ostringstream os;
  os << "mixture " << mix.sizes() << " -> latent " << out.latent.sizes() << " -> mask " << out.mask.sizes()
     << " in [" << fmt(out.mask.min().item<double>()) << ", " << fmt(out.mask.max().item<double>())
     << "] -> estimate " << out.estimate.sizes() << "; stage shapes are also checked inside every forward";
  return {ok, os.str()};
}

// 5 ---------------------------------------------------------------------------

Outcome icl_fixed_points() {
  SeparatorConfig c;
  c.n_filters = 8;
  WaveformEncoder we(c);
  WaveformDecoder wd(c);
  we->to(torch::kFloat64);
  wd->to(torch::kFloat64);
  double zero_case, identity_case;
  {
    torch::NoGradGuard g;
    we->conv()->bias.zero_();
    wd->deconv()->bias.zero_();
    zero_case = icl(torch::zeros({1, 8, 50}, f64()), we, wd).item<double>();
    we->conv()->weight.zero_();
    wd->deconv()->weight.zero_();
    for (int k = 0; k < 8; ++k) {
      we->conv()->weight[k][0][k] = 1.0;
      wd->deconv()->weight[k][0][k] = 1.0;
    }
    identity_case = icl(torch::rand({1, 8, 50}, f64()), we, wd).item<double>();
  }
  double worst = 0;
  for (int draw = 0; draw < 50; ++draw) {
    torch::manual_seed(500 + draw);
    WaveformEncoder re(c);
    WaveformDecoder rd(c);
    re->to(torch::kFloat64);
    rd->to(torch::kFloat64);
    auto m = torch::rand({1, 8, 16}, f64()) * 2.0;
    const double got = icl(m, re, rd).item<double>();
    const double want =
        icl_oracle(re->conv()->weight, re->conv()->bias, rd->deconv()->weight, rd->deconv()->bias, m[0], 8);
    worst = std::max(worst, std::abs(got - want));
  }
  return {zero_case == 0.0 && identity_case == 0.0 && worst < 1e-6,
          "m=0: " + fmt(zero_case) + "; identity weights: " + fmt(identity_case) +
              "; max |icl - oracle| over 50 draws = " + fmt(worst)};
}

// 6 ---------------------------------------------------------------------------

Outcome gan_fixed_points() {
  auto ones = torch::ones({4, 3}, f64()), zeros = torch::zeros({4, 3}, f64());
  const double a = disc_loss(ones, zeros).item<double>();
  const double b = disc_loss(0.5 * ones, 0.5 * ones).item<double>();
  const double c = gen_adv_loss(ones).item<double>();
  return {a == 0.0 && b == 0.5 && c == 0.0,
          "disc(1, 0) = " + fmt(a) + "; disc(0.5, 0.5) = " + fmt(b) + "; gen(1) = " + fmt(c)};
}

// 7 ---------------------------------------------------------------------------

struct Groups {
  bool encoder, blender, core, decoder, theta, msd;
  bool operator==(const Groups&) const = default;
  std::string str() const {
    std::string s;
    auto add = [&](bool f, const char* n) {
      if (f) s += s.empty() ? n : std::string("+") + n;
    };
    add(encoder, "gamma");
    add(blender, "blender");
    add(core, "core");
    add(decoder, "delta");
    add(theta, "theta");
    add(msd, "msd");
    return s;
  }
};

Groups updated_groups(const TrainConfig& cfg, const std::vector<MixtureExample>& data, StepMetrics* metrics) {
  Trainer t(cfg);
  auto snap = [](torch::nn::Module& m) {
    std::vector<torch::Tensor> v;
    for (auto& p : m.parameters()) v.push_back(p.detach().clone());
    return v;
  };
  auto moved = [](const std::vector<torch::Tensor>& before, torch::nn::Module& m) {
    auto ps = m.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (!torch::equal(before[i], ps[i])) return true;
    return false;
  };
  auto& sep = t.separator();
  auto e0 = snap(*sep->encoder()), b0 = snap(*sep->blender()), c0 = snap(*sep->core()), d0 = snap(*sep->decoder()),
       th0 = snap(*t.speaker_encoder()), m0 = snap(*t.discriminator());
  *metrics = t.train_step(ptrs(data));
  return {moved(e0, *sep->encoder()), moved(b0, *sep->blender()), moved(c0, *sep->core()),
          moved(d0, *sep->decoder()), moved(th0, *t.speaker_encoder()), moved(m0, *t.discriminator())};
}

Outcome ablation_wiring() {
  auto data = tiny_examples(2);
  const Groups gen{true, true, true, true, false, false};
  const Groups gen_theta{true, true, true, true, true, false};
  const Groups all{true, true, true, true, true, true};
  struct Row {
    std::string preset;
    Groups want;
    std::set<std::string> losses;
  };
  const std::vector<Row> rows{
      {"baseline", gen, {"wrql"}},
      {"icl", gen, {"wrql", "icl"}},
      {"icl_secl", gen, {"wrql", "icl", "secl"}},
      {"joint", gen_theta, {"wrql", "icl", "secl"}},
      {"dual_path", gen_theta, {"wrql", "icl", "secl"}},
      {"full", all, {"wrql", "icl", "secl", "adv_g"}},
  };
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    StepMetrics m;
    const TrainConfig cfg = apply_preset(tiny_train_config(), r.preset);
    const Groups got = updated_groups(cfg, data, &m);
    std::set<std::string> losses;
    for (const auto& [k, _] : m.weights) losses.insert(k);
    const bool row_ok = got == r.want && losses == r.losses && m.adv_d.has_value() == cfg.adv_on;
    ok &= row_ok;
    detail += r.preset + "{" + got.str() + "}" + (row_ok ? "" : "!") + " ";
  }
  return {ok, "updated parameter groups after one step: " + detail};
}

// 8 ---------------------------------------------------------------------------

struct OverfitRun {
  double si_snri = 0;
  int64_t steps = 0;
  double seconds = 0;
  std::unique_ptr<Trainer> model;
};

OverfitRun overfit(TrainConfig cfg, const std::vector<MixtureExample>& train, int64_t max_steps,
                   bool stop_at_target, const fs::path& log_path, const std::string& tag) {
  const auto t0 = Clock::now();
  OverfitRun run;
  run.model = std::make_unique<Trainer>(cfg);
  std::ofstream log(log_path, std::ios::trunc);
  int epoch = 0;
  double current = run.model->validate(train);
  while (run.model->step() < max_steps) {
    ++epoch;
    for (const auto& idx : epoch_batches(train.size(), cfg.batch_size, cfg.seed, epoch)) {
      std::vector<const MixtureExample*> items;
      for (auto i : idx) items.push_back(&train[i]);
      auto m = run.model->train_step(items);
      m.epoch = epoch;
      const int64_t step = run.model->step();
      std::optional<double> val;
      if (step % 50 == 0 || step == max_steps) {
        current = run.model->validate(train);
        val = current;
        std::cerr << "[8:" << tag << "] step " << step << " train SI-SNRi " << fmt(current, 4) << " dB ("
                  << fmt(seconds_since(t0), 4) << " s)" << std::endl;
      }
      log << metrics_to_json(m, val).dump() << "\n";
      if (step >= max_steps || (stop_at_target && val && *val >= 5.0)) break;
    }
    if (stop_at_target && current >= 5.0) break;
  }
  run.si_snri = run.model->validate(train);
  run.steps = run.model->step();
  run.seconds = seconds_since(t0);
  return run;
}

Outcome toy_overfit(const fs::path& work, int64_t max_steps) {
  const auto t0 = Clock::now();
  const fs::path corpus = work / "corpus", data_dir = work / "train8";
  fs::remove_all(work);
  synthetic::write_corpus(corpus, 4, 2, 6.0, 2024);
  SynthOptions opts;
  opts.n_examples = 8;
  opts.seed = 2024;
  synth_dataset(corpus, data_dir, opts);
  const auto train = load_examples(read_manifest(data_dir / "manifest.tsv"));

  TrainConfig cfg;
  cfg.apply_toy();
  cfg = apply_preset(cfg, "dual_path");
  cfg.secl_on = false;  // WRQL + ICL, joint encoder training
  cfg.seed = 7;
  cfg.batch_size = 4;
  cfg.lr = 1e-4;
  cfg.precision = "float32";

  auto a = overfit(cfg, train, max_steps, true, work / "overfit_metrics.jsonl", "wrql+icl");
  a.model->save(work / "overfit.ckpt");

  TrainConfig with_secl = cfg;
  with_secl.secl_on = true;
  auto b = overfit(with_secl, train, a.steps, false, work / "overfit_secl_metrics.jsonl", "wrql+icl+secl");

  // Held-out speaker check on the jointly trained encoder: two fresh
  // segments of one corpus voice against a fresh segment of another.
  auto& enc = a.model->speaker_encoder();
  const auto v0 = synthetic::make_voice(derive_seed(2024, 1000 + 0));
  const auto v1 = synthetic::make_voice(derive_seed(2024, 1000 + 1));
  torch::Tensor e00, e01, e1;
  {
    torch::NoGradGuard g;
    auto emb = [&](const synthetic::Voice& v, uint64_t seed) {
      const auto w = synthetic::render_utterance(v, 2.0, kEncoderRate, seed);
      return enc->forward(w.to_tensor(cfg.dtype()).unsqueeze(0)).squeeze(0);
    };
    e00 = emb(v0, 900001);
    e01 = emb(v0, 900002);
    e1 = emb(v1, 900003);
  }
  const double same = cosine(e00, e01), diff = cosine(e00, e1);

  const bool ok = a.si_snri >= 5.0 && a.steps <= max_steps && same > diff;
  return {ok, "WRQL+ICL (joint): train SI-SNRi " + fmt(a.si_snri, 4) + " dB after " + std::to_string(a.steps) +
                  " steps (" + fmt(a.seconds, 4) + " s); with SECL: " + fmt(b.si_snri, 4) + " dB after " +
                  std::to_string(b.steps) + " steps (reported only); held-out cosine same-speaker " +
                  fmt(same, 4) + " vs different-speaker " + fmt(diff, 4) + "; total " +
                  fmt(seconds_since(t0), 4) + " s"};
}

// 9 ---------------------------------------------------------------------------

Outcome determinism() {
  auto data = tiny_examples(4);
  TrainConfig cfg = apply_preset(tiny_train_config(), "full");
  cfg.seed = 99;
  auto run = [&](std::vector<std::string>& log) {
    Trainer t(cfg);
    for (int step = 0; step < 10; ++step) {
      const auto batches = epoch_batches(data.size(), cfg.batch_size, cfg.seed, 1 + step / 2);
      std::vector<const MixtureExample*> items;
      for (auto i : batches[step % 2]) items.push_back(&data[i]);
      log.push_back(metrics_to_json(t.train_step(items)).dump());
    }
    return ckpt::encode(t.to_container());
  };
  std::vector<std::string> la, lb;
  const auto ca = run(la);
  const auto cb = run(lb);
  return {la == lb && ca == cb, std::string("10-step loss logs ") + (la == lb ? "identical" : "differ") +
                                    "; checkpoints (" + std::to_string(ca.size()) + " bytes, float64) " +
                                    (ca == cb ? "bitwise identical" : "differ")};
}

// 10 --------------------------------------------------------------------------

Outcome checkpoint_round_trip(const fs::path& work) {
  fs::create_directories(work);
  auto data = tiny_examples(2);
  Trainer t(apply_preset(tiny_train_config(), "full"));
  t.train_step(ptrs(data));
  const Waveform before = t.extract(data[0].mixture, data[0].reference);
  const fs::path path = work / "roundtrip.ckpt";
  t.save(path);
  const bool same = Trainer::load(path)->extract(data[0].mixture, data[0].reference) == before;

  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  int rejected = 0, tried = 0;
  auto attempt = [&](const std::string& content) {
    ++tried;
    const fs::path bad = work / "bad.ckpt";
    std::ofstream(bad, std::ios::binary | std::ios::trunc) << content;
    try {
      Trainer::load(bad);
    } catch (const IoError&) {
      ++rejected;
    }
  };
  attempt(bytes.substr(0, bytes.size() - 1));
  attempt(bytes.substr(0, 100));
  attempt("");
  std::string flipped = bytes;
  flipped[bytes.size() / 3] ^= 1;
  attempt(flipped);
  std::string magic = bytes;
  magic[3] = '?';
  attempt(magic);
  return {same && rejected == tried, std::string("reloaded forward ") + (same ? "bitwise equal" : "differs") +
                                         "; " + std::to_string(rejected) + "/" + std::to_string(tried) +
                                         " corrupt files rejected"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "tse_acceptance").string();
  std::vector<int> only;
  int64_t max_steps = 2000;
  app.add_option("--work-dir", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--max-steps", max_steps, "Step budget for the toy overfit");
  CLI11_PARSE(app, argc, argv);

  torch::set_num_threads(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"scale/offset invariance", invariance},
      {"gradient checks", gradient_checks},
      {"shape pipeline", shape_pipeline},
      {"ICL fixed points", icl_fixed_points},
      {"GAN loss fixed points", gan_fixed_points},
      {"ablation wiring", ablation_wiring},
      {"toy overfit", [&] { return toy_overfit(fs::path(work) / "overfit", max_steps); }},
      {"determinism", determinism},
      {"checkpoint round-trip", [&] { return checkpoint_round_trip(fs::path(work) / "ckpt"); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
