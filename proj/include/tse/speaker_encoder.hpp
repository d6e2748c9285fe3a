// Copyright 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tse/core.hpp"
#include "tse/features.hpp"

namespace tse {

struct SpeakerEncoderConfig {
  int hidden = 256;
  int layers = 3;
  int embed_dim = 256;

  static SpeakerEncoderConfig toy() { return {64, 3, 256}; }

  void validate() const {
    TSE_REQUIRE(hidden > 0 && layers > 0 && embed_dim > 0,
                "speaker encoder sizes must be positive");
  }
};

inline double cosine(const torch::Tensor& a, const torch::Tensor& b) {
  return torch::dot(a.flatten().to(torch::kFloat64), b.flatten().to(torch::kFloat64)).item<double>();
}

/// d-vector style speaker encoder: log-mel -> LSTM stack -> last frame
/// -> linear projection -> L2 normalisation. Parameter set theta.
class SpeakerEncoderImpl : public torch::nn::Module {
 public:
  explicit SpeakerEncoderImpl(SpeakerEncoderConfig cfg = {})
      : cfg_((cfg.validate(), cfg)),
        lstm_(torch::nn::LSTMOptions(LogMelConfig{}.n_mels, cfg.hidden)
                  .num_layers(cfg.layers)
                  .batch_first(true)),
        proj_(cfg.hidden, cfg.embed_dim) {
    register_module("lstm", lstm_);
    register_module("proj", proj_);
    for (auto& p : lstm_->named_parameters()) {
      if (p.key().rfind("weight", 0) == 0) {
        torch::nn::init::orthogonal_(p.value());
      } else {
        torch::nn::init::zeros_(p.value());
      }
    }
  }

  const SpeakerEncoderConfig& config() const { return cfg_; }

  /// [B, n] at 16 kHz -> [B, embed_dim] unit-norm rows.
  torch::Tensor forward(const torch::Tensor& wave16k) {
    TSE_REQUIRE(wave16k.dim() == 2, "speaker encoder expects [B, n]");
    auto feats = mel_(wave16k);  // [B, F, n_mels]
    auto out = std::get<0>(lstm_->forward(feats));
    auto last = out.select(1, out.size(1) - 1);
    auto e = proj_->forward(last);
    e = e / e.norm(2, {1}, true).clamp_min(1e-12);
    {
      torch::NoGradGuard no_grad;
      const double dev = (e.norm(2, {1}) - 1.0).abs().max().item<double>();
      if (!(dev <= 1e-5)) throw NumericalError("speaker embedding is not unit norm");
    }
    return e;
  }

 private:
  SpeakerEncoderConfig cfg_;
  LogMel mel_;
  torch::nn::LSTM lstm_;
  torch::nn::Linear proj_;
};
TORCH_MODULE(SpeakerEncoder);

/// Single-utterance embedding with the norm invariant checked.
inline torch::Tensor embed(SpeakerEncoder& enc, const Waveform& reference) {
  TSE_REQUIRE(reference.sample_rate == kEncoderRate, "speaker encoder expects 16 kHz input");
  TSE_REQUIRE(log_mel_frames(static_cast<int64_t>(reference.size())) >= 1,
              "reference too short for one analysis frame");
  auto dtype = enc->parameters().front().scalar_type();
  auto e = enc->forward(reference.to_tensor(dtype).unsqueeze(0)).squeeze(0);
  const double norm = e.norm().item<double>();
  if (std::abs(norm - 1.0) > 1e-5) throw NumericalError("speaker embedding is not unit norm");
  return e;
}

}  // namespace tse
