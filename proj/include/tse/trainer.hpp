// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ATen/CPUGeneratorImpl.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tse/checkpoint.hpp"
#include "tse/core.hpp"
#include "tse/dataset.hpp"
#include "tse/discriminator.hpp"
#include "tse/objectives.hpp"
#include "tse/optim.hpp"
#include "tse/separator.hpp"
#include "tse/speaker_encoder.hpp"

namespace tse {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

struct TrainConfig {
  uint64_t seed = 0;
  int batch_size = 4;
  double lr = 1e-4;
  double weight_decay = 1e-7;
  int epochs = 201;
  int64_t max_steps = 0;  // 0: no limit
  double grad_clip = 5.0;
  std::string precision = "float32";

  bool icl_on = true;
  bool secl_on = true;
  bool adv_on = true;
  bool joint_training = true;
  LossWeights weights;

  SeparatorConfig separator;
  SpeakerEncoderConfig speaker;
  DiscriminatorConfig discriminator;

  /// Desk-scale sizes: chunk 16, 2 dual-path blocks, 64-unit encoder LSTM.
  void apply_toy() {
    auto backbone = separator.backbone;
    separator = SeparatorConfig::toy();
    separator.backbone = backbone;
    speaker = SpeakerEncoderConfig::toy();
    discriminator = DiscriminatorConfig::toy();
  }

  torch::Dtype dtype() const {
    if (precision == "float32") return torch::kFloat32;
    if (precision == "float64") return torch::kFloat64;
    throw InvalidInput("precision must be float32 or float64, got '" + precision + "'");
  }

  void validate() const {
    TSE_REQUIRE(batch_size > 0, "batch_size must be positive");
    TSE_REQUIRE(lr > 0, "lr must be positive");
    TSE_REQUIRE(weight_decay >= 0, "weight_decay must be non-negative");
    TSE_REQUIRE(epochs >= 1, "epochs must be at least 1");
    TSE_REQUIRE(max_steps >= 0, "max_steps must be non-negative");
    TSE_REQUIRE(grad_clip >= 0, "grad_clip must be non-negative");
    TSE_REQUIRE(separator.embed_dim == speaker.embed_dim,
                "separator embed_dim must match the speaker encoder");
    weights.validate();
    separator.validate();
    speaker.validate();
    discriminator.validate();
    (void)dtype();
  }
};

/// Named rows of the ablation table.
///   baseline    WRQL only, frozen speaker encoder
///   icl         + inverse consistency
///   icl_secl    + speaker embedding consistency
///   joint       + joint encoder training
///   dual_path   joint, dual-path backbone (selected explicitly)
///   full        + multi-scale adversarial refinement
inline TrainConfig apply_preset(TrainConfig c, const std::string& name) {
  c.icl_on = c.secl_on = c.adv_on = c.joint_training = false;
  if (name == "baseline") return c;
  c.icl_on = true;
  if (name == "icl") return c;
  c.secl_on = true;
  if (name == "icl_secl") return c;
  c.joint_training = true;
  if (name == "joint") return c;
  c.separator.backbone = Backbone::DualPath;
  if (name == "dual_path") return c;
  c.adv_on = true;
  if (name == "full") return c;
  throw InvalidInput("unknown preset '" + name + "'");
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"baseline", "icl", "icl_secl", "joint", "dual_path", "full"};
  return names;
}

inline void to_json(json& j, const SeparatorConfig& c) {
  j = json{{"n_filters", c.n_filters}, {"kernel", c.kernel},       {"stride", c.stride},
           {"embed_dim", c.embed_dim}, {"n_heads", c.n_heads},     {"n_blocks", c.n_blocks},
           {"chunk", c.chunk},         {"ff_hidden", c.ff_hidden}, {"bidirectional", c.bidirectional},
           {"backbone", to_string(c.backbone)}};
}

inline void from_json(const json& j, SeparatorConfig& c) {
  c.n_filters = j.value("n_filters", c.n_filters);
  c.kernel = j.value("kernel", c.kernel);
  c.stride = j.value("stride", c.stride);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.n_blocks = j.value("n_blocks", c.n_blocks);
  c.chunk = j.value("chunk", c.chunk);
  c.ff_hidden = j.value("ff_hidden", c.ff_hidden);
  c.bidirectional = j.value("bidirectional", c.bidirectional);
  if (j.contains("backbone")) c.backbone = backbone_from_string(j.at("backbone").get<std::string>());
}

inline json config_to_json(const TrainConfig& c) {
  return json{
      {"seed", c.seed},
      {"batch_size", c.batch_size},
      {"lr", c.lr},
      {"weight_decay", c.weight_decay},
      {"epochs", c.epochs},
      {"max_steps", c.max_steps},
      {"grad_clip", c.grad_clip},
      {"precision", c.precision},
      {"losses", {{"icl", c.icl_on}, {"secl", c.secl_on}, {"adv", c.adv_on}}},
      {"joint_training", c.joint_training},
      {"weights", {{"wrql", c.weights.wrql}, {"secl", c.weights.secl}, {"icl", c.weights.icl},
                   {"adv_g", c.weights.adv_g}}},
      {"separator", c.separator},
      {"speaker_encoder", {{"hidden", c.speaker.hidden}, {"layers", c.speaker.layers},
                           {"embed_dim", c.speaker.embed_dim}}},
      {"discriminator", {{"base_channels", c.discriminator.base_channels},
                         {"leaky_slope", c.discriminator.leaky_slope}}},
  };
}

/// Reads every known key from `j` on top of `base`. Unknown keys are an
/// error so typos do not silently fall back to defaults.
inline TrainConfig config_from_json(const json& j, TrainConfig c = {}) {
  static const std::vector<std::string> known{
      "seed", "batch_size", "lr", "weight_decay", "epochs", "max_steps", "grad_clip", "precision",
      "losses", "joint_training", "weights", "separator", "speaker_encoder", "discriminator", "toy", "preset"};
  TSE_REQUIRE(j.is_object(), "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    TSE_REQUIRE(std::find(known.begin(), known.end(), key) != known.end(), "unknown config key '", key, "'");
  }
  try {
    if (j.value("toy", false)) c.apply_toy();
    if (j.contains("preset")) c = apply_preset(c, j.at("preset").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epochs = j.value("epochs", c.epochs);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.precision = j.value("precision", c.precision);
    c.joint_training = j.value("joint_training", c.joint_training);
    if (j.contains("losses")) {
      const auto& l = j.at("losses");
      c.icl_on = l.value("icl", c.icl_on);
      c.secl_on = l.value("secl", c.secl_on);
      c.adv_on = l.value("adv", c.adv_on);
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      c.weights.wrql = w.value("wrql", c.weights.wrql);
      c.weights.secl = w.value("secl", c.weights.secl);
      c.weights.icl = w.value("icl", c.weights.icl);
      c.weights.adv_g = w.value("adv_g", c.weights.adv_g);
    }
    if (j.contains("separator")) from_json(j.at("separator"), c.separator);
    if (j.contains("speaker_encoder")) {
      const auto& s = j.at("speaker_encoder");
      c.speaker.hidden = s.value("hidden", c.speaker.hidden);
      c.speaker.layers = s.value("layers", c.speaker.layers);
      c.speaker.embed_dim = s.value("embed_dim", c.speaker.embed_dim);
    }
    if (j.contains("discriminator")) {
      const auto& d = j.at("discriminator");
      c.discriminator.base_channels = d.value("base_channels", c.discriminator.base_channels);
      c.discriminator.leaky_slope = d.value("leaky_slope", c.discriminator.leaky_slope);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

inline TrainConfig read_config(const fs::path& path, TrainConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return config_from_json(j, base);
}

// ---------------------------------------------------------------------------
// Batches and metrics

struct Batch {
  torch::Tensor mixture;    // [B, t]
  torch::Tensor target;     // [B, t]
  torch::Tensor reference;  // [B, n]
};

inline Batch make_batch(const std::vector<const MixtureExample*>& items, torch::Dtype dtype) {
  TSE_REQUIRE(!items.empty(), "empty batch");
  std::vector<torch::Tensor> mix, tgt, ref;
  for (const auto* ex : items) {
    TSE_REQUIRE(ex->mixture.size() == items[0]->mixture.size() &&
                    ex->reference.size() == items[0]->reference.size(),
                "all examples in a batch must share lengths");
    mix.push_back(ex->mixture.to_tensor(dtype));
    tgt.push_back(ex->target.to_tensor(dtype));
    ref.push_back(ex->reference.to_tensor(dtype));
  }
  return {torch::stack(mix), torch::stack(tgt), torch::stack(ref)};
}

struct StepMetrics {
  int64_t step = 0;
  int epoch = 0;
  double total = 0.0;
  std::optional<double> wrql, secl, icl, adv_g, adv_d;
  std::map<std::string, double> weights;
};

inline json metrics_to_json(const StepMetrics& m, std::optional<double> val_si_snri = std::nullopt) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"step", m.step},       {"epoch", m.epoch},     {"wrql", opt(m.wrql)},
              {"secl", opt(m.secl)},  {"icl", opt(m.icl)},    {"adv_g", opt(m.adv_g)},
              {"adv_d", opt(m.adv_d)}, {"total", m.total},    {"val_si_snri", opt(val_si_snri)}};
}

/// 1-based epoch with the highest validation metric; the earliest wins ties.
inline int best_epoch(const std::vector<double>& metrics) {
  TSE_REQUIRE(!metrics.empty(), "no validation metrics");
  std::size_t best = 0;
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    if (metrics[i] > metrics[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

/// Batch order for an epoch: a seeded shuffle that depends only on
/// (seed, epoch).
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size, uint64_t seed,
                                                           int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x45504F43ULL + static_cast<uint64_t>(epoch)));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += batch_size) {
    batches.emplace_back(order.begin() + i, order.begin() + std::min(n, i + batch_size));
  }
  return batches;
}

// ---------------------------------------------------------------------------
// Trainer

/// Owns every learnable parameter set and both optimisers.
///
/// Generator parameters are the separator (encoder gamma, blender, core,
/// decoder delta) plus the speaker encoder theta when joint training is
/// on; they are updated with Adam (coupled weight decay). The
/// discriminator is updated with AdamW at the same learning rate. Each
/// step updates the generator first, then the discriminator on the
/// detached estimate from the same forward pass.
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg) : cfg_((cfg.validate(), std::move(cfg))) {
    torch::manual_seed(cfg_.seed);
    speaker_ = SpeakerEncoder(cfg_.speaker);
    separator_ = Separator(cfg_.separator);
    msd_ = MultiScaleDiscriminator(cfg_.discriminator);
    const auto dtype = cfg_.dtype();
    speaker_->to(dtype);
    separator_->to(dtype);
    msd_->to(dtype);

    std::vector<torch::Tensor> gen = separator_->parameters();
    if (cfg_.joint_training) {
      for (auto& p : speaker_->parameters()) gen.push_back(p);
    } else {
      for (auto& p : speaker_->parameters()) p.set_requires_grad(false);
    }
    gen_opt_ = std::make_unique<Adam>(
        gen, AdamOptions{cfg_.lr, 0.9, 0.999, 1e-8, cfg_.weight_decay, WeightDecayMode::Coupled});
    disc_opt_ = std::make_unique<Adam>(
        msd_->parameters(), AdamOptions{cfg_.lr, 0.9, 0.999, 1e-8, cfg_.weight_decay, WeightDecayMode::Decoupled});
  }

  const TrainConfig& config() const { return cfg_; }
  SpeakerEncoder& speaker_encoder() { return speaker_; }
  Separator& separator() { return separator_; }
  MultiScaleDiscriminator& discriminator() { return msd_; }
  Adam& generator_optimizer() { return *gen_opt_; }
  Adam& discriminator_optimizer() { return *disc_opt_; }
  int64_t step() const { return step_; }
  int epoch() const { return epoch_; }
  double best_metric() const { return best_metric_; }
  int best_epoch_index() const { return best_epoch_; }

  /// Checkpoint written if a step produces a non-finite loss.
  void set_abort_dump(fs::path p) { abort_dump_ = std::move(p); }

  StepMetrics train_step(const Batch& batch) {
    speaker_->train();
    separator_->train();
    msd_->train();
    StepMetrics m;
    m.epoch = epoch_;

    gen_opt_->zero_grad();
    for (auto& p : speaker_->parameters()) {
      if (p.grad().defined()) p.mutable_grad().zero_();
    }
    SeparatorOutput out;
    LossValue loss;
    try {
      auto embedding = speaker_->forward(batch.reference);
      out = separator_->forward(batch.mixture, embedding);
      LossParts parts;
      parts.wrql = wrql(batch.target, out.estimate);
      if (cfg_.icl_on) parts.icl = icl(out.masked, separator_->encoder(), separator_->decoder());
      if (cfg_.secl_on) parts.secl = secl(speaker_, batch.reference, out.estimate);
      if (cfg_.adv_on) parts.adv_g = gen_adv_loss(msd_, out.estimate);
      loss = total_generator_loss(parts, cfg_.weights);
      check_finite(loss.total, "total generator loss");
    } catch (const NumericalError&) {
      dump_on_abort();
      throw;
    }
    loss.total.backward();
    clip_grad_norm(gen_opt_->params(), cfg_.grad_clip);
    gen_opt_->step();

    m.total = loss.value();
    m.weights = loss.weights;
    auto get = [&](const char* k) -> std::optional<double> {
      auto it = loss.breakdown.find(k);
      return it == loss.breakdown.end() ? std::nullopt : std::optional<double>(it->second);
    };
    m.wrql = get("wrql");
    m.secl = get("secl");
    m.icl = get("icl");
    m.adv_g = get("adv_g");

    if (cfg_.adv_on) {
      disc_opt_->zero_grad();
      auto d_loss = disc_loss(msd_, batch.target, out.estimate);
      const double v = d_loss.item<double>();
      if (!std::isfinite(v)) {
        dump_on_abort();
        throw NumericalError("non-finite discriminator loss");
      }
      d_loss.backward();
      disc_opt_->step();
      m.adv_d = v;
    }
    m.step = ++step_;
    return m;
  }

  StepMetrics train_step(const std::vector<const MixtureExample*>& items) {
    return train_step(make_batch(items, cfg_.dtype()));
  }

  /// Inference on one mixture: the estimate has the mixture's length.
  Waveform extract(const Waveform& mixture, const Waveform& reference) {
    torch::NoGradGuard no_grad;
    speaker_->eval();
    separator_->eval();
    Waveform mix = mixture.sample_rate == kSeparatorRate ? mixture : resample(mixture, kSeparatorRate);
    Waveform ref = reference.sample_rate == kEncoderRate ? reference : resample(reference, kEncoderRate);
    TSE_REQUIRE(mix.size() >= static_cast<std::size_t>(cfg_.separator.kernel), "mixture shorter than ",
                cfg_.separator.kernel, " samples");
    TSE_REQUIRE(log_mel_frames(static_cast<int64_t>(ref.size())) >= 1,
                "reference too short for one analysis frame");
    const auto dtype = cfg_.dtype();
    auto e = speaker_->forward(ref.to_tensor(dtype).unsqueeze(0));
    auto out = separator_->forward(mix.to_tensor(dtype).unsqueeze(0), e);
    check_finite(out.estimate, "separator output");
    return Waveform::from_tensor(out.estimate.squeeze(0), kSeparatorRate);
  }

  /// Mean SI-SNR improvement of the current model over `examples`.
  double validate(const std::vector<MixtureExample>& examples) {
    TSE_REQUIRE(!examples.empty(), "validation set is empty");
    double sum = 0.0;
    for (const auto& ex : examples) {
      const Waveform est = extract(ex.mixture, ex.reference);
      sum += si_snr(ex.target, est) - si_snr(ex.target, ex.mixture);
    }
    return sum / static_cast<double>(examples.size());
  }

  // -- checkpointing --------------------------------------------------------

  ckpt::Container to_container() const {
    ckpt::Container c;
    c.header = json{
        {"format", "tse-checkpoint"},
        {"config", config_to_json(cfg_)},
        {"epoch", epoch_},
        {"step", step_},
        {"best_metric", std::isfinite(best_metric_) ? json(best_metric_) : json(nullptr)},
        {"best_epoch", best_epoch_},
        {"generator_optimizer_steps", gen_opt_->step_count()},
        {"discriminator_optimizer_steps", disc_opt_->step_count()},
    };
    auto add_module = [&](const std::string& prefix, const torch::nn::Module& mod) {
      for (const auto& p : mod.named_parameters()) c.tensors.emplace_back(prefix + p.key(), p.value());
    };
    add_module("theta/", *speaker_);
    add_module("separator/", *separator_);
    add_module("msd/", *msd_);
    auto add_opt = [&](const std::string& prefix, Adam& opt) {
      for (std::size_t i = 0; i < opt.params().size(); ++i) {
        c.tensors.emplace_back(prefix + std::to_string(i) + "/exp_avg", opt.exp_avg()[i]);
        c.tensors.emplace_back(prefix + std::to_string(i) + "/exp_avg_sq", opt.exp_avg_sq()[i]);
      }
    };
    add_opt("opt_g/", *gen_opt_);
    add_opt("opt_d/", *disc_opt_);
    c.tensors.emplace_back("rng/torch_cpu", at::detail::getDefaultCPUGenerator().get_state());
    return c;
  }

  void save(const fs::path& path) const { ckpt::save(path, to_container()); }

  /// Rebuilds a trainer from a checkpoint. Every tensor is validated before
  /// the trainer is returned; a bad file never yields a partially loaded
  /// trainer.
  static std::unique_ptr<Trainer> from_container(const ckpt::Container& c) {
    if (c.header.value("format", "") != "tse-checkpoint") throw IoError("checkpoint has an unknown format tag");
    TrainConfig cfg;
    try {
      cfg = config_from_json(c.header.at("config"));
    } catch (const std::exception& e) {
      throw IoError(std::string("checkpoint config is invalid: ") + e.what());
    }
    auto t = std::make_unique<Trainer>(cfg);
    torch::NoGradGuard no_grad;
    std::size_t used = 0;
    auto copy = [&](const std::string& name, torch::Tensor dst) {
      const auto& src = c.at(name);
      if (src.sizes() != dst.sizes() || src.scalar_type() != dst.scalar_type()) {
        throw IoError("checkpoint tensor '" + name + "' has the wrong shape or dtype");
      }
      dst.copy_(src);
      ++used;
    };
    auto load_module = [&](const std::string& prefix, torch::nn::Module& mod) {
      for (auto& p : mod.named_parameters()) copy(prefix + p.key(), p.value());
    };
    load_module("theta/", *t->speaker_);
    load_module("separator/", *t->separator_);
    load_module("msd/", *t->msd_);
    auto load_opt = [&](const std::string& prefix, Adam& opt) {
      for (std::size_t i = 0; i < opt.params().size(); ++i) {
        copy(prefix + std::to_string(i) + "/exp_avg", opt.exp_avg()[i]);
        copy(prefix + std::to_string(i) + "/exp_avg_sq", opt.exp_avg_sq()[i]);
      }
    };
    load_opt("opt_g/", *t->gen_opt_);
    load_opt("opt_d/", *t->disc_opt_);
    ++used;  // rng
    if (used != c.tensors.size()) throw IoError("checkpoint has unexpected extra tensors");
    try {
      t->epoch_ = c.header.at("epoch").get<int>();
      t->step_ = c.header.at("step").get<int64_t>();
      const auto& best = c.header.at("best_metric");
      t->best_metric_ = best.is_null() ? -std::numeric_limits<double>::infinity() : best.get<double>();
      t->best_epoch_ = c.header.at("best_epoch").get<int>();
      t->gen_opt_->set_step_count(c.header.at("generator_optimizer_steps").get<int64_t>());
      t->disc_opt_->set_step_count(c.header.at("discriminator_optimizer_steps").get<int64_t>());
    } catch (const json::exception& e) {
      throw IoError(std::string("checkpoint header is incomplete: ") + e.what());
    }
    auto gen = at::detail::getDefaultCPUGenerator();
    gen.set_state(c.at("rng/torch_cpu"));
    return t;
  }

  static std::unique_ptr<Trainer> load(const fs::path& path) {
    const auto c = ckpt::load(path);
    try {
      return from_container(c);
    } catch (const IoError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }

  // -- epoch loop -----------------------------------------------------------

  struct FitResult {
    fs::path best_checkpoint;
    fs::path last_checkpoint;
    std::vector<double> val_history;
    int best_epoch = 0;
  };

  /// Trains for cfg.epochs (or until cfg.max_steps), validating after every
  /// epoch and keeping the checkpoint with the best validation SI-SNRi.
  /// Writes `<out>/metrics.jsonl`, `<out>/best.ckpt`, `<out>/last.ckpt`.
  FitResult fit(const std::vector<MixtureExample>& train, const std::vector<MixtureExample>& val,
                const fs::path& out_dir, std::ostream* progress = nullptr) {
    TSE_REQUIRE(!train.empty(), "training set is empty");
    TSE_REQUIRE(!val.empty(), "validation set is empty");
    fs::create_directories(out_dir);
    set_abort_dump(out_dir / "abort.ckpt");
    std::ofstream log(out_dir / "metrics.jsonl", std::ios::app);
    if (!log) throw IoError((out_dir / "metrics.jsonl").string() + ": cannot open");

    FitResult result;
    result.best_checkpoint = out_dir / "best.ckpt";
    result.last_checkpoint = out_dir / "last.ckpt";
    bool stop = false;
    while (epoch_ < cfg_.epochs && !stop) {
      const int current = epoch_ + 1;
      for (const auto& idx : epoch_batches(train.size(), cfg_.batch_size, cfg_.seed, current)) {
        std::vector<const MixtureExample*> items;
        for (auto i : idx) items.push_back(&train[i]);
        auto m = train_step(items);
        m.epoch = current;
        log << metrics_to_json(m).dump() << "\n";
        if (cfg_.max_steps > 0 && step_ >= cfg_.max_steps) {
          stop = true;
          break;
        }
      }
      epoch_ = current;
      const double v = validate(val);
      result.val_history.push_back(v);
      json rec{{"epoch", epoch_}, {"step", step_}, {"val_si_snri", v}};
      log << rec.dump() << "\n";
      log.flush();
      if (progress) *progress << "epoch " << epoch_ << " step " << step_ << " val SI-SNRi " << v << " dB\n";
      if (v > best_metric_) {
        best_metric_ = v;
        best_epoch_ = epoch_;
        save(result.best_checkpoint);
      }
      save(result.last_checkpoint);
    }
    result.best_epoch = best_epoch_;
    return result;
  }

 private:
  void dump_on_abort() const {
    if (abort_dump_.empty()) return;
    try {
      save(abort_dump_);
    } catch (...) {
    }
  }

  TrainConfig cfg_;
  SpeakerEncoder speaker_{nullptr};
  Separator separator_{nullptr};
  MultiScaleDiscriminator msd_{nullptr};
  std::unique_ptr<Adam> gen_opt_;
  std::unique_ptr<Adam> disc_opt_;
  int64_t step_ = 0;
  int epoch_ = 0;
  double best_metric_ = -std::numeric_limits<double>::infinity();
  int best_epoch_ = 0;
  fs::path abort_dump_;
};

}  // namespace tse
